//! Finitely presented solutions: an explicit table for the nodes shallower
//! than `boundary + period`, and below that the rule that dropping the
//! outermost `period` letters keeps the value.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::check::Valuation;
use crate::ext::ExtValue;
use crate::lp::{d_feasible, LinearProgram, LpConstraint, LpForm, Witness};
use crate::model::{ArithAtom, ArithSide, ConstraintSystem, LabelWord, Names, Node, Rel, TreeExpr, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowScheme {
    pub boundary: usize,
    pub period: usize,
    pub table: BTreeMap<Node, ExtValue>,
    /// Values of the free arithmetic variables, by name without `$`.
    pub lambdas: BTreeMap<String, ExtValue>,
}

/// `(word, variable, value)` as printed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeEntry {
    pub word: String,
    pub var: String,
    pub value: ExtValue,
}

/// Drops outermost blocks of `period` letters until the word is shorter
/// than `boundary + period`.
pub fn reduce_word(w: &LabelWord, boundary: usize, period: usize) -> LabelWord {
    let window = boundary + period;
    if w.len() < window {
        return w.clone();
    }
    let k = (w.len() - window) / period + 1;
    LabelWord(w.0[k * period..].to_vec())
}

impl WindowScheme {
    pub fn reduce(&self, w: &LabelWord) -> LabelWord {
        reduce_word(w, self.boundary, self.period)
    }

    pub fn entries(&self, names: &Names<'_>) -> Vec<SchemeEntry> {
        self.table
            .iter()
            .map(|(n, v)| SchemeEntry {
                word: names.word(&n.word),
                var: names.vars[n.var.0 as usize].clone(),
                value: v.clone(),
            })
            .collect()
    }
}

impl Valuation for WindowScheme {
    fn value(&self, word: &LabelWord, var: VarId) -> ExtValue {
        self.table.get(&Node::new(self.reduce(word), var)).cloned().unwrap_or_else(ExtValue::zero)
    }

    fn lambda(&self, name: &str) -> ExtValue {
        self.lambdas.get(name).cloned().unwrap_or_else(ExtValue::zero)
    }

    fn prefix_key(&self, prefix: &LabelWord) -> Option<Vec<u32>> {
        Some(self.reduce(prefix).0.iter().map(|l| l.0).collect())
    }
}

/// The program over one unknown per table entry whose solutions over `D`
/// are exactly the schemes of this shape. Entries of variables in `forbid`
/// are forced finite.
pub fn window_program(sys: &ConstraintSystem, boundary: usize, period: usize, forbid: &BTreeSet<VarId>) -> LinearProgram {
    assert!(period > 0, "period must be positive");
    let names = sys.names();
    let key = |n: &Node| names.root(&Node::new(reduce_word(&n.word, boundary, period), n.var));
    let mut lp = LinearProgram::new();
    for x in sys.var_ids() {
        for w in sys.alphabet.words_below(boundary + period) {
            let v = names.root(&Node::new(w, x));
            if forbid.contains(&x) {
                lp.forced_finite.insert(v.clone());
            }
            lp.add_var(v);
        }
    }
    for l in sys.lambdas() {
        lp.add_var(format!("${l}"));
    }
    let mut seen = BTreeSet::new();
    let form = |terms: &[TreeExpr], p: &LabelWord| {
        let mut f = LpForm::default();
        for t in terms {
            f.add(key(&t.node.under(p)), t.coeff.clone());
        }
        f
    };
    let arith = |s: &ArithSide| {
        let mut f = LpForm::constant(s.constant.clone());
        for (a, c) in &s.terms {
            match a {
                ArithAtom::Root(n) => f.add(key(n), c.clone()),
                ArithAtom::Lambda(_) => f.add(names.atom(a), c.clone()),
            }
        }
        f
    };
    for c in &sys.arith {
        let lc = LpConstraint::new(arith(&c.lhs), c.rel, arith(&c.rhs));
        if seen.insert(lc.clone()) {
            lp.push(lc);
        }
    }
    // every prefix at least `boundary + period` long repeats one shorter by `period`
    for p in sys.alphabet.words_below(boundary + period) {
        for c in &sys.tree {
            let lc = LpConstraint::new(form(std::slice::from_ref(&TreeExpr::unit(c.lhs.clone())), &p), Rel::Ge, form(&c.rhs, &p));
            if lc.lhs == lc.rhs || !seen.insert(lc.clone()) {
                continue;
            }
            lp.push(lc);
        }
    }
    lp
}

/// Turns a witness of [`window_program`] into a scheme.
pub fn scheme_from_witness(sys: &ConstraintSystem, boundary: usize, period: usize, w: &Witness) -> WindowScheme {
    let names = sys.names();
    let mut table = BTreeMap::new();
    for x in sys.var_ids() {
        for word in sys.alphabet.words_below(boundary + period) {
            let n = Node::new(word, x);
            let v = w.get(&names.root(&n)).cloned().unwrap_or_else(ExtValue::zero);
            table.insert(n, v);
        }
    }
    let lambdas = sys
        .lambdas()
        .into_iter()
        .map(|l| {
            let v = w.get(&format!("${l}")).cloned().unwrap_or_else(ExtValue::zero);
            (l, v)
        })
        .collect();
    WindowScheme { boundary, period, table, lambdas }
}

/// Searches for a scheme of the given shape over `D`.
pub fn solve_window(
    sys: &ConstraintSystem,
    boundary: usize,
    period: usize,
    forbid: &BTreeSet<VarId>,
) -> Option<(WindowScheme, LinearProgram, Witness)> {
    let lp = window_program(sys, boundary, period, forbid);
    let w = d_feasible(&lp).witness()?.clone();
    Some((scheme_from_witness(sys, boundary, period, &w), lp, w))
}
