//! Feasibility over `Q≥0 ∪ {∞}` by isolating the variables forced finite.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{q_feasible, LinearProgram, LpResult, Refutation};
use crate::ext::{ExtValue, Rational};
use crate::model::Rel;

/// One step of the finiteness derivation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MustFinStep {
    pub var: String,
    /// The constraint whose greater side was already finite, or `None` for a seed.
    pub by: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MustFin {
    pub steps: Vec<MustFinStep>,
}

impl MustFin {
    pub fn vars(&self) -> BTreeSet<String> {
        self.steps.iter().map(|s| s.var.clone()).collect()
    }

    /// Replays the derivation against `lp` and returns the derived set.
    pub fn verify(&self, lp: &LinearProgram) -> Result<BTreeSet<String>, String> {
        let mut known = BTreeSet::new();
        for s in &self.steps {
            match s.by {
                None => {
                    if !lp.forced_finite.contains(&s.var) {
                        return Err(format!("{} is not a seed", s.var));
                    }
                }
                Some(i) => {
                    let c = lp.constraints.get(i).ok_or("constraint index out of range")?;
                    let ok = greater_sides(c).any(|(g, l)| {
                        g.vars().all(|v| known.contains(v)) && l.terms.contains_key(&s.var)
                    });
                    if !ok {
                        return Err(format!("constraint {i} does not force {}", s.var));
                    }
                }
            }
            known.insert(s.var.clone());
        }
        Ok(known)
    }
}

fn greater_sides(c: &super::LpConstraint) -> impl Iterator<Item = (&super::LpForm, &super::LpForm)> {
    let v = match c.rel {
        Rel::Ge => vec![(&c.lhs, &c.rhs)],
        Rel::Le => vec![(&c.rhs, &c.lhs)],
        Rel::Eq => vec![(&c.lhs, &c.rhs), (&c.rhs, &c.lhs)],
    };
    v.into_iter()
}

/// Least set of variables that are finite in every solution over `D`.
pub fn must_fin(lp: &LinearProgram) -> MustFin {
    let mut known: BTreeSet<String> = BTreeSet::new();
    let mut steps = Vec::new();
    for v in &lp.forced_finite {
        known.insert(v.clone());
        steps.push(MustFinStep { var: v.clone(), by: None });
    }
    loop {
        let mut changed = false;
        for (i, c) in lp.constraints.iter().enumerate() {
            for (g, l) in greater_sides(c) {
                if !g.vars().all(|v| known.contains(v)) {
                    continue;
                }
                for v in l.vars() {
                    if known.insert(v.clone()) {
                        steps.push(MustFinStep { var: v.clone(), by: Some(i) });
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return MustFin { steps };
        }
    }
}

/// Decides feasibility over `D`. Variables outside the finite core are set
/// to `∞`; refutations concern only the core.
pub fn d_feasible(lp: &LinearProgram) -> LpResult {
    let mf = must_fin(lp);
    let core = mf.vars();
    let mut restricted = LinearProgram::new();
    let mut index = Vec::new();
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.vars().all(|v| core.contains(v)) {
            restricted.push(c.clone());
            index.push(i);
        }
    }
    restricted.variables.extend(core.iter().cloned());
    restricted.maximize = lp.maximize.clone().filter(|m| core.contains(m));
    match q_feasible(&restricted) {
        LpResult::Feasible(w) => {
            let witness = lp
                .variables
                .iter()
                .map(|v| (v.clone(), w.get(v).cloned().unwrap_or(ExtValue::Inf)))
                .collect();
            LpResult::Feasible(witness)
        }
        LpResult::Infeasible(r) => {
            let mut multipliers = vec![Rational::zero(); lp.constraints.len()];
            for (k, &i) in index.iter().enumerate() {
                multipliers[i] = r.multipliers[k].clone();
            }
            LpResult::Infeasible(Refutation { multipliers, must_fin: Some(mf) })
        }
    }
}
