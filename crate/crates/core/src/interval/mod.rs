//! Symbolic interval sets over arithmetic variables, their propagation
//! through the normal form, and the program they induce.

mod propagate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::ext::{fmt_rational, ExtValue, Rational};
use crate::lp::LpForm;
use crate::model::ConstraintSystem;

pub use propagate::{
    emit_lp, propagate, scheme_from_classes, show_classes, stabilization_check, InfinityConflict, Pattern,
    Propagation, PropagationOutcome, Stable, EPS,
};

/// Endpoint expression `Σ c·v + k`. Lower endpoints have nonnegative
/// coefficients; upper endpoints may subtract.
pub type LinearForm = LpForm;

/// Most intervals kept per class after pruning.
pub const CLASS_CAP: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lo {
    Fin(LinearForm),
    Inf,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Hi {
    Fin(LinearForm),
    Inf,
    /// A finite quantity minus an infinite one: no value fits.
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub lo: Lo,
    pub hi: Hi,
}

fn scaled(f: &LinearForm, c: &Rational) -> LinearForm {
    let mut out = LinearForm::constant(&f.constant * c);
    for (v, k) in &f.terms {
        out.add(v.clone(), k * c);
    }
    out
}

fn plus(a: &LinearForm, b: &LinearForm, sign: i32) -> LinearForm {
    let mut out = a.clone();
    let s = Rational::from_integer(sign.into());
    out.constant += &b.constant * &s;
    for (v, k) in &b.terms {
        out.add(v.clone(), k * &s);
    }
    out
}

/// All coefficients and the constant of `f` are nonnegative, so `f ≥ 0`
/// for every nonnegative valuation.
fn nonneg(f: &LinearForm) -> bool {
    !f.constant.is_negative() && f.terms.values().all(|c| !c.is_negative())
}

impl Lo {
    pub fn zero() -> Lo {
        Lo::Fin(LinearForm::default())
    }

    fn add(&self, o: &Lo) -> Lo {
        match (self, o) {
            (Lo::Fin(a), Lo::Fin(b)) => Lo::Fin(plus(a, b, 1)),
            _ => Lo::Inf,
        }
    }

    fn scale(&self, c: &Rational) -> Lo {
        match self {
            Lo::Fin(f) => Lo::Fin(scaled(f, c)),
            Lo::Inf => Lo::Inf,
        }
    }

    /// `self ≥ o` for every valuation.
    fn geq(&self, o: &Lo) -> bool {
        match (self, o) {
            (Lo::Inf, _) => true,
            (Lo::Fin(_), Lo::Inf) => false,
            (Lo::Fin(a), Lo::Fin(b)) => nonneg(&plus(a, b, -1)),
        }
    }

    pub fn eval(&self, w: &BTreeMap<String, ExtValue>) -> Option<ExtValue> {
        match self {
            Lo::Fin(f) => f.eval(w),
            Lo::Inf => Some(ExtValue::Inf),
        }
    }
}

impl Hi {
    fn sub(&self, l: &Lo) -> Hi {
        match (self, l) {
            (Hi::Empty, _) => Hi::Empty,
            (Hi::Inf, _) => Hi::Inf,
            (Hi::Fin(_), Lo::Inf) => Hi::Empty,
            (Hi::Fin(a), Lo::Fin(b)) => Hi::Fin(plus(a, b, -1)),
        }
    }

    fn scale(&self, c: &Rational) -> Hi {
        match self {
            Hi::Fin(f) => Hi::Fin(scaled(f, c)),
            other => other.clone(),
        }
    }

    /// `self ≤ o` for every valuation.
    fn leq(&self, o: &Hi) -> bool {
        match (self, o) {
            (Hi::Empty, _) | (_, Hi::Inf) => true,
            (_, Hi::Empty) | (Hi::Inf, _) => false,
            (Hi::Fin(a), Hi::Fin(b)) => nonneg(&plus(b, a, -1)),
        }
    }
}

impl Interval {
    pub fn point(f: LinearForm) -> Interval {
        Interval { lo: Lo::Fin(f.clone()), hi: Hi::Fin(f) }
    }

    pub fn zero() -> Interval {
        Interval::point(LinearForm::default())
    }

    pub fn inf() -> Interval {
        Interval { lo: Lo::Inf, hi: Hi::Inf }
    }

    pub fn at_least(lo: Lo) -> Interval {
        Interval { lo, hi: Hi::Inf }
    }

    pub fn at_most(hi: Hi) -> Interval {
        Interval { lo: Lo::zero(), hi }
    }

    fn dominates(&self, o: &Interval) -> bool {
        self.lo.geq(&o.lo) && self.hi.leq(&o.hi)
    }

    /// Both endpoints are constants and they cross.
    pub fn concretely_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (_, Hi::Empty) | (Lo::Inf, Hi::Fin(_)) => true,
            (Lo::Fin(l), Hi::Fin(h)) => l.terms.is_empty() && h.terms.is_empty() && l.constant > h.constant,
            _ => false,
        }
    }
}

fn show_lo(l: &Lo) -> String {
    match l {
        Lo::Fin(f) => show_form(f),
        Lo::Inf => "inf".into(),
    }
}

/// Prints signed forms as `a - b`.
pub fn show_form(f: &LinearForm) -> String {
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (v, c) in &f.terms {
        let a = c.abs();
        let s = if a == Rational::from_integer(1.into()) { v.clone() } else { format!("{} * {v}", fmt_rational(&a)) };
        parts.push((c.is_negative(), s));
    }
    if !f.constant.is_zero() || parts.is_empty() {
        parts.push((f.constant.is_negative(), fmt_rational(&f.constant.abs())));
    }
    parts.sort_by_key(|(neg, _)| *neg);
    let mut out = String::new();
    for (i, (neg, s)) in parts.iter().enumerate() {
        match (i, neg) {
            (0, true) => out.push_str(&format!("-{s}")),
            (0, false) => out.push_str(s),
            (_, true) => out.push_str(&format!(" - {s}")),
            (_, false) => out.push_str(&format!(" + {s}")),
        }
    }
    out
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hi = match &self.hi {
            Hi::Fin(h) => show_form(h),
            Hi::Inf => "inf".into(),
            Hi::Empty => "-inf".into(),
        };
        write!(f, "[{}, {hi}]", show_lo(&self.lo))
    }
}

/// Canonical set of intervals attached to a node.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntervalSet(pub BTreeSet<Interval>);

impl IntervalSet {
    pub fn of(items: impl IntoIterator<Item = Interval>) -> IntervalSet {
        let mut s = IntervalSet(items.into_iter().collect());
        s.prune();
        s
    }

    pub fn zero() -> IntervalSet {
        IntervalSet::of([Interval::zero()])
    }

    pub fn inf() -> IntervalSet {
        IntervalSet::of([Interval::inf()])
    }

    pub fn is_zero(&self) -> bool {
        *self == IntervalSet::zero()
    }

    pub fn is_inf(&self) -> bool {
        *self == IntervalSet::inf()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> {
        self.0.iter()
    }

    pub fn lowers(&self) -> impl Iterator<Item = &Lo> {
        self.0.iter().map(|i| &i.lo)
    }

    pub fn uppers(&self) -> impl Iterator<Item = &Hi> {
        self.0.iter().map(|i| &i.hi)
    }

    pub fn union(&self, o: &IntervalSet) -> IntervalSet {
        IntervalSet::of(self.0.iter().chain(&o.0).cloned())
    }

    /// Drops intervals implied by another member; keeps at most
    /// [`CLASS_CAP`] of the rest.
    pub fn prune(&mut self) {
        let items: Vec<Interval> = std::mem::take(&mut self.0).into_iter().collect();
        let mut keep = BTreeSet::new();
        for (i, a) in items.iter().enumerate() {
            let implied = items.iter().enumerate().any(|(j, b)| {
                // among mutually dominating intervals keep the first
                j != i && b.dominates(a) && (!a.dominates(b) || j < i)
            });
            if !implied {
                keep.insert(a.clone());
            }
        }
        self.0 = keep.into_iter().take(CLASS_CAP).collect();
    }

    /// `c · I`: endpoints scaled by `c > 0`.
    pub fn scale(&self, c: &Rational) -> IntervalSet {
        IntervalSet::of(self.0.iter().map(|i| Interval { lo: i.lo.scale(c), hi: i.hi.scale(c) }))
    }

    pub fn concretely_empty(&self) -> bool {
        self.0.iter().any(Interval::concretely_empty)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", v.join(", "))
    }
}

/// `{[a + c, ∞] | [a, b] ∈ A, [c, d] ∈ B}`.
pub fn iset_add(a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
    IntervalSet::of(a.0.iter().flat_map(|x| b.0.iter().map(move |y| Interval::at_least(x.lo.add(&y.lo)))))
}

/// `{[0, b − c] | [a, b] ∈ A, [c, d] ∈ B}`.
pub fn iset_sub(a: &IntervalSet, b: &IntervalSet) -> IntervalSet {
    IntervalSet::of(a.0.iter().flat_map(|x| b.0.iter().map(move |y| Interval::at_most(x.hi.sub(&y.lo)))))
}

/// Least common multiple of the nonzero differences between the word
/// length of a greater side and that of each of its summands; 1 if there
/// are none.
pub fn compute_s(sys: &ConstraintSystem) -> usize {
    sys.tree
        .iter()
        .flat_map(|c| c.rhs.iter().map(move |t| c.lhs.level().abs_diff(t.node.level())))
        .filter(|d| *d > 0)
        .fold(1usize, |acc, d| acc.lcm(&d))
}
