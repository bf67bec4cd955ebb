//! Finite linear programs over `Q≥0` and over `Q≥0 ∪ {∞}`.
//!
//! Each constraint compares two nonnegative linear forms. Variables are plain
//! strings (the solver uses `@(l x)`, `$k` and `$eps`) and are implicitly
//! bounded below by zero.

mod dfeas;
mod simplex;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::ext::{fmt_rational, parse_rational, ExtValue, Rational};
use crate::model::Rel;

pub use dfeas::{d_feasible, must_fin, MustFin, MustFinStep};
pub use simplex::q_feasible;

/// `Σ c·v + constant` with positive coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LpForm {
    pub terms: BTreeMap<String, Rational>,
    pub constant: Rational,
}

impl LpForm {
    pub fn constant(c: Rational) -> Self {
        LpForm { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(name: impl Into<String>) -> Self {
        let mut f = LpForm::default();
        f.add(name, Rational::one());
        f
    }

    pub fn add(&mut self, name: impl Into<String>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(name.into()).or_insert_with(Rational::zero);
        *e += c;
        // keep the map free of cancelled entries
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.terms.keys()
    }

    pub fn eval(&self, values: &BTreeMap<String, ExtValue>) -> Option<ExtValue> {
        let mut acc = ExtValue::Fin(self.constant.clone());
        for (v, c) in &self.terms {
            acc += &values.get(v)?.scale(c);
        }
        Some(acc)
    }
}

impl fmt::Display for LpForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(v, c)| if c.is_one() { v.clone() } else { format!("{} * {}", fmt_rational(c), v) })
            .collect();
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(fmt_rational(&self.constant));
        }
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LpConstraint {
    pub lhs: LpForm,
    pub rel: Rel,
    pub rhs: LpForm,
}

impl LpConstraint {
    pub fn new(lhs: LpForm, rel: Rel, rhs: LpForm) -> Self {
        LpConstraint { lhs, rel, rhs }
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.lhs.vars().chain(self.rhs.vars())
    }

    /// Greater and lesser side of an inequality; `None` for equalities.
    pub fn oriented(&self) -> Option<(&LpForm, &LpForm)> {
        match self.rel {
            Rel::Ge => Some((&self.lhs, &self.rhs)),
            Rel::Le => Some((&self.rhs, &self.lhs)),
            Rel::Eq => None,
        }
    }

    pub fn holds(&self, values: &BTreeMap<String, ExtValue>) -> Option<bool> {
        let l = self.lhs.eval(values)?;
        let r = self.rhs.eval(values)?;
        Some(match self.rel {
            Rel::Ge => l >= r,
            Rel::Le => l <= r,
            Rel::Eq => l == r,
        })
    }

    /// Coefficients of `greater − lesser` and its constant.
    fn difference(&self) -> (BTreeMap<String, Rational>, Rational) {
        let (g, l) = self.oriented().unwrap_or((&self.lhs, &self.rhs));
        let mut m = g.terms.clone();
        for (v, c) in &l.terms {
            *m.entry(v.clone()).or_insert_with(Rational::zero) -= c;
        }
        (m, &g.constant - &l.constant)
    }
}

impl fmt::Display for LpConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.rel.symbol(), self.rhs)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearProgram {
    pub variables: BTreeSet<String>,
    pub constraints: Vec<LpConstraint>,
    /// Variable to maximize, if any.
    pub maximize: Option<String>,
    /// Variables known to be finite in every solution over `D`.
    pub forced_finite: BTreeSet<String>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: LpConstraint) {
        self.variables.extend(c.vars().cloned());
        self.constraints.push(c);
    }

    pub fn add_var(&mut self, v: impl Into<String>) {
        self.variables.insert(v.into());
    }

    /// Checks a witness by substitution. Returns the first violated constraint.
    pub fn check(&self, w: &BTreeMap<String, ExtValue>) -> Result<(), usize> {
        for (i, c) in self.constraints.iter().enumerate() {
            if c.holds(w) != Some(true) {
                return Err(i);
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(m) = &self.maximize {
            s.push_str(&format!("# maximize {m}\n"));
        }
        if !self.forced_finite.is_empty() {
            let v: Vec<&str> = self.forced_finite.iter().map(String::as_str).collect();
            s.push_str(&format!("# finite {}\n", v.join(", ")));
        }
        for c in &self.constraints {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }

    /// Reads the format written by [`LinearProgram::to_text`].
    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut lp = LinearProgram::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# maximize ") {
                lp.maximize = Some(rest.trim().to_string());
                lp.add_var(rest.trim());
                continue;
            }
            if let Some(rest) = line.strip_prefix("# finite ") {
                lp.forced_finite.extend(rest.split(',').map(|v| v.trim().to_string()));
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let c = parse_constraint(line).map_err(|e| format!("line {}: {e}", no + 1))?;
            lp.push(c);
        }
        let ff: Vec<String> = lp.forced_finite.iter().cloned().collect();
        lp.variables.extend(ff);
        Ok(lp)
    }
}

fn parse_constraint(line: &str) -> Result<LpConstraint, String> {
    let (lhs, rel, rhs) = [(">=", Rel::Ge), ("<=", Rel::Le), ("=", Rel::Eq)]
        .iter()
        .find_map(|(sym, rel)| line.split_once(sym).map(|(a, b)| (a, *rel, b)))
        .ok_or("missing relation")?;
    Ok(LpConstraint::new(parse_form(lhs)?, rel, parse_form(rhs)?))
}

fn parse_form(s: &str) -> Result<LpForm, String> {
    let mut f = LpForm::default();
    for term in s.split('+') {
        let term = term.trim();
        let (coef, name) = match term.split_once('*') {
            Some((c, n)) => (Some(c.trim()), Some(n.trim())),
            None if term.starts_with(|c: char| c.is_ascii_digit()) => (Some(term), None),
            None => (None, Some(term)),
        };
        let c = match coef {
            Some(c) => parse_rational(c).ok_or_else(|| format!("bad coefficient `{c}`"))?,
            None => Rational::one(),
        };
        if c.is_negative() {
            return Err(format!("negative coefficient in `{term}`"));
        }
        match name {
            Some("") => return Err("empty term".into()),
            Some(n) => f.add(n, c),
            None => f.constant += c,
        }
    }
    Ok(f)
}

/// A witness of feasibility.
pub type Witness = BTreeMap<String, ExtValue>;

/// A nonnegative combination of constraints that sums to `0 ≥ 1`.
///
/// Multipliers are indexed like the program's constraints; only equalities
/// may receive negative multipliers. When `must_fin` is present the
/// combination only concerns that set of variables, and the derivation shows
/// they are finite in every solution over `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refutation {
    #[serde(serialize_with = "ser_rats", deserialize_with = "de_rats")]
    pub multipliers: Vec<Rational>,
    pub must_fin: Option<MustFin>,
}

fn ser_rats<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_rational))
}

fn de_rats<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
    let v: Vec<String> = Deserialize::deserialize(d)?;
    v.iter()
        .map(|s| parse_rational(s).ok_or_else(|| serde::de::Error::custom(format!("bad rational `{s}`"))))
        .collect()
}

impl Refutation {
    /// Combines the constraints. Returns the combined coefficients and
    /// constant of `Σ y_i (greater_i − lesser_i) ≥ 0`.
    pub fn combine(&self, lp: &LinearProgram) -> (BTreeMap<String, Rational>, Rational) {
        let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
        let mut constant = Rational::zero();
        for (c, y) in lp.constraints.iter().zip(&self.multipliers) {
            if y.is_zero() {
                continue;
            }
            let (m, k) = c.difference();
            for (v, a) in m {
                *coeffs.entry(v).or_insert_with(Rational::zero) += a * y;
            }
            constant += k * y;
        }
        coeffs.retain(|_, v| !v.is_zero());
        (coeffs, constant)
    }

    /// Exact check that the combination is contradictory.
    pub fn verify(&self, lp: &LinearProgram) -> Result<(), String> {
        if self.multipliers.len() != lp.constraints.len() {
            return Err("multiplier count does not match".into());
        }
        for (c, y) in lp.constraints.iter().zip(&self.multipliers) {
            if c.rel != Rel::Eq && y.is_negative() {
                return Err(format!("negative multiplier on `{c}`"));
            }
        }
        if let Some(mf) = &self.must_fin {
            let derived = mf.verify(lp)?;
            for (c, y) in lp.constraints.iter().zip(&self.multipliers) {
                if !y.is_zero() && c.vars().any(|v| !derived.contains(v)) {
                    return Err(format!("`{c}` uses a variable that may be infinite"));
                }
            }
        }
        let (coeffs, constant) = self.combine(lp);
        if let Some((v, _)) = coeffs.iter().find(|(_, a)| a.is_positive()) {
            return Err(format!("combined coefficient of {v} is positive"));
        }
        if !constant.is_negative() {
            return Err("combined constant is not negative".into());
        }
        Ok(())
    }

    /// The normalized contradiction, `0 ≥ 1` when verification succeeds.
    pub fn conclusion(&self, lp: &LinearProgram) -> String {
        let (coeffs, constant) = self.combine(lp);
        if coeffs.is_empty() && constant.is_negative() {
            return "0 >= 1".into();
        }
        let mut g = LpForm::default();
        let mut l = LpForm::default();
        for (v, a) in coeffs {
            if a.is_positive() {
                g.add(v, a)
            } else {
                l.add(v, -a)
            }
        }
        if constant.is_negative() {
            l.constant = -constant
        } else {
            g.constant = constant
        }
        format!("{g} >= {l}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Feasible(Witness),
    Infeasible(Refutation),
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LpResult::Feasible(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            LpResult::Feasible(w) => Some(w),
            _ => None,
        }
    }

    pub fn refutation(&self) -> Option<&Refutation> {
        match self {
            LpResult::Infeasible(r) => Some(r),
            _ => None,
        }
    }
}
