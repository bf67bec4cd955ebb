//! Level-wise unfolding of tree constraints into finite programs, which
//! semi-decides unsatisfiability, plus two ground-truth oracles.

mod brute;
mod check;
mod scheme;

use std::collections::BTreeSet;

use serde::Serialize;

use crate::lp::{d_feasible, LinearProgram, LpConstraint, LpForm, LpResult, Refutation};
use crate::model::{ArithAtom, ArithConstraint, ArithSide, ConstraintSystem, Names, TreeConstraint, VarId};

pub use scheme::{reduce_word, scheme_from_witness, solve_window, window_program, SchemeEntry, WindowScheme};
pub use brute::{brute_closure, brute_entails, BudgetExceeded};
pub use check::{
    check_assignment, check_relations, ExplicitValuation, Report, TableValuation, Valuation, Violation,
};

/// Renders an arithmetic side as a program form over printed atom names.
pub fn lp_form(names: &Names<'_>, s: &ArithSide) -> LpForm {
    let mut f = LpForm::constant(s.constant.clone());
    for (a, c) in &s.terms {
        f.add(names.atom(a), c.clone());
    }
    f
}

pub fn lp_constraint(names: &Names<'_>, c: &ArithConstraint) -> LpConstraint {
    LpConstraint::new(lp_form(names, &c.lhs), c.rel, lp_form(names, &c.rhs))
}

/// Unfolding after `level` steps.
#[derive(Clone, Debug)]
pub struct UnfoldState {
    pub level: usize,
    /// Tree constraints lifted by every word of length `level`.
    pub frontier: Vec<TreeConstraint>,
    pub program: LinearProgram,
    forbid: BTreeSet<VarId>,
}

impl UnfoldState {
    /// Level 0: the arithmetic constraints and the root projections of the
    /// tree constraints. Root atoms of variables in `forbid` are forced finite.
    pub fn new(sys: &ConstraintSystem, forbid: &BTreeSet<VarId>) -> Self {
        let mut st = UnfoldState {
            level: 0,
            frontier: sys.tree.clone(),
            program: LinearProgram::new(),
            forbid: forbid.clone(),
        };
        let names = sys.names();
        for c in &sys.arith {
            st.add(&names, c);
        }
        for c in sys.tree.clone() {
            st.add(&names, &c.root());
        }
        st
    }

    fn add(&mut self, names: &Names<'_>, c: &ArithConstraint) {
        for a in c.atoms() {
            if let ArithAtom::Root(n) = a {
                if self.forbid.contains(&n.var) {
                    self.program.forced_finite.insert(names.atom(a));
                }
            }
        }
        self.program.push(lp_constraint(names, c));
    }
}

/// Replaces each frontier constraint by its children under every label and
/// adds their root projections.
pub fn unfold_step(sys: &ConstraintSystem, st: &mut UnfoldState) {
    let names = sys.names();
    let mut next = Vec::with_capacity(st.frontier.len() * sys.alphabet.len());
    for c in &st.frontier {
        for l in sys.alphabet.labels() {
            next.push(c.under(&crate::model::LabelWord(vec![l])));
        }
    }
    for c in &next {
        st.add(&names, &c.root());
    }
    st.frontier = next;
    st.level += 1;
}

#[derive(Clone, Debug, Serialize)]
pub struct UnsatCertificate {
    pub level: usize,
    #[serde(skip)]
    pub program: LinearProgram,
    pub refutation: Refutation,
}

/// Tests the current program over `D`.
pub fn test_level(st: &UnfoldState) -> Option<UnsatCertificate> {
    match d_feasible(&st.program) {
        LpResult::Feasible(_) => None,
        LpResult::Infeasible(r) => {
            Some(UnsatCertificate { level: st.level, program: st.program.clone(), refutation: r })
        }
    }
}

/// Unfolds up to `max_level`, returning the first infeasible program.
pub fn semi_decide_unsat(
    sys: &ConstraintSystem,
    max_level: usize,
    forbid: &BTreeSet<VarId>,
) -> Option<UnsatCertificate> {
    let mut st = UnfoldState::new(sys, forbid);
    loop {
        if let Some(c) = test_level(&st) {
            return Some(c);
        }
        if st.level >= max_level || sys.alphabet.is_empty() {
            return None;
        }
        unfold_step(sys, &mut st);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_system;

    #[test]
    fn one_step_adds_children() {
        let sys = parse_system("labels: l r\nx >= l r x").unwrap();
        let mut st = UnfoldState::new(&sys, &BTreeSet::new());
        assert_eq!(st.program.to_text(), "@(x) >= @(l r x)\n");
        unfold_step(&sys, &mut st);
        let names = sys.names();
        let shown: Vec<String> = st.frontier.iter().map(|c| names.tree_constraint(c)).collect();
        assert_eq!(shown, vec!["l x >= l l r x", "r x >= r l r x"]);
        assert_eq!(st.program.constraints.len(), 3);
    }

    #[test]
    fn doubling_against_a_pinned_root_is_refuted() {
        let sys = parse_system("labels: l\n@(x) = 1\nx >= l x\nl x >= x + x").unwrap();
        let cert = semi_decide_unsat(&sys, 3, &BTreeSet::new()).expect("unsat");
        assert!(cert.level <= 1);
        cert.refutation.verify(&cert.program).unwrap();
        assert_eq!(cert.refutation.conclusion(&cert.program), "0 >= 1");
    }

    #[test]
    fn infinite_escape_is_not_refuted() {
        let sys = parse_system("@(y) = 1\ny >= l y\ny >= r y\nl x >= x + y\nr x >= x + y\nx >= l r x").unwrap();
        assert!(semi_decide_unsat(&sys, 4, &BTreeSet::new()).is_none());
    }
}
