//! Pointwise checking of candidate solutions.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::ext::ExtValue;
use crate::model::{
    Alphabet, ArithAtom, ArithConstraint, ArithSide, ConstraintSystem, LabelWord, Names, Node, RawSystem, Rel,
    TreeExpr, TreeRelation, VarId,
};

/// Assigns a value to every tree node and free arithmetic variable.
pub trait Valuation {
    /// Value at the root of `word · var`.
    fn value(&self, word: &LabelWord, var: VarId) -> ExtValue;

    fn lambda(&self, name: &str) -> ExtValue;

    /// Prefixes with equal keys are followed by identical values below them.
    /// Lets the checker skip repeated subtrees.
    fn prefix_key(&self, _prefix: &LabelWord) -> Option<Vec<u32>> {
        None
    }
}

/// A valuation given by a function on nodes.
pub struct ExplicitValuation<F> {
    pub f: F,
    pub lambdas: BTreeMap<String, ExtValue>,
}

impl<F: Fn(&LabelWord, VarId) -> ExtValue> ExplicitValuation<F> {
    pub fn new(f: F) -> Self {
        ExplicitValuation { f, lambdas: BTreeMap::new() }
    }
}

impl<F: Fn(&LabelWord, VarId) -> ExtValue> Valuation for ExplicitValuation<F> {
    fn value(&self, word: &LabelWord, var: VarId) -> ExtValue {
        (self.f)(word, var)
    }

    fn lambda(&self, name: &str) -> ExtValue {
        self.lambdas.get(name).cloned().unwrap_or_else(ExtValue::zero)
    }
}

/// Explicit finite table with a default for unlisted nodes.
#[derive(Clone, Debug, Default)]
pub struct TableValuation {
    pub nodes: BTreeMap<Node, ExtValue>,
    pub lambdas: BTreeMap<String, ExtValue>,
    pub default: Option<ExtValue>,
}

impl Valuation for TableValuation {
    fn value(&self, word: &LabelWord, var: VarId) -> ExtValue {
        let n = Node::new(word.clone(), var);
        self.nodes.get(&n).cloned().or_else(|| self.default.clone()).unwrap_or_else(ExtValue::zero)
    }

    fn lambda(&self, name: &str) -> ExtValue {
        self.lambdas.get(name).cloned().unwrap_or_else(ExtValue::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// The violated constraint as written.
    pub constraint: String,
    /// Prefix under which it fails; empty for arithmetic constraints.
    pub prefix: String,
    pub greater: ExtValue,
    pub lesser: ExtValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub depth: usize,
    /// Distinct prefixes examined after deduplication.
    pub prefixes_checked: usize,
    pub violation: Option<Violation>,
    /// Every prefix deeper than `depth` repeats a checked one, so passing
    /// means the valuation is a solution.
    pub exhaustive: bool,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

fn eval_tree(v: &dyn Valuation, prefix: &LabelWord, side: &[TreeExpr]) -> ExtValue {
    let mut acc = ExtValue::zero();
    for t in side {
        acc += &v.value(&prefix.concat(&t.node.word), t.node.var).scale(&t.coeff);
    }
    acc
}

fn eval_arith(v: &dyn Valuation, side: &ArithSide) -> ExtValue {
    let mut acc = ExtValue::Fin(side.constant.clone());
    for (a, c) in &side.terms {
        let x = match a {
            ArithAtom::Lambda(n) => v.lambda(n),
            ArithAtom::Root(n) => v.value(&n.word, n.var),
        };
        acc += &x.scale(c);
    }
    acc
}

fn holds(l: &ExtValue, rel: Rel, r: &ExtValue) -> bool {
    match rel {
        Rel::Ge => l >= r,
        Rel::Le => l <= r,
        Rel::Eq => l == r,
    }
}

fn check_general(
    alphabet: &Alphabet,
    names: Names<'_>,
    relations: &[TreeRelation],
    arith: &[ArithConstraint],
    v: &dyn Valuation,
    depth: usize,
) -> Report {
    let mut report = Report { depth, prefixes_checked: 0, violation: None, exhaustive: alphabet.is_empty() };
    for c in arith {
        let (l, r) = (eval_arith(v, &c.lhs), eval_arith(v, &c.rhs));
        if !holds(&l, c.rel, &r) {
            let (greater, lesser) = if c.rel == Rel::Le { (r, l) } else { (l, r) };
            report.violation =
                Some(Violation { constraint: names.arith_constraint(c), prefix: String::new(), greater, lesser });
            return report;
        }
    }
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut level = vec![LabelWord::empty()];
    for d in 0..=depth {
        let mut next = Vec::new();
        for p in &level {
            if let Some(k) = v.prefix_key(p) {
                if !seen.insert(k) {
                    continue;
                }
            }
            report.prefixes_checked += 1;
            for r in relations {
                let (l, rv) = (eval_tree(v, p, &r.lhs), eval_tree(v, p, &r.rhs));
                if !holds(&l, r.rel, &rv) {
                    let (greater, lesser) = if r.rel == Rel::Le { (rv, l) } else { (l, rv) };
                    let text = format!(
                        "{} {} {}",
                        names.tree_sum(&r.lhs),
                        r.rel.symbol(),
                        names.tree_sum(&r.rhs)
                    );
                    report.violation =
                        Some(Violation { constraint: text, prefix: names.word(p), greater, lesser });
                    return report;
                }
            }
            if d < depth {
                for l in alphabet.labels() {
                    next.push(p.prepend(l));
                }
            }
        }
        if next.is_empty() && d < depth {
            report.exhaustive = true;
            break;
        }
        level = next;
    }
    report
}

/// Checks every constraint under every prefix of length at most `depth`.
pub fn check_assignment(sys: &ConstraintSystem, v: &dyn Valuation, depth: usize) -> Report {
    check_general(&sys.alphabet, sys.names(), &sys.relations(), &sys.arith, v, depth)
}

/// Like [`check_assignment`] but for systems with bilateral relations.
pub fn check_relations(sys: &RawSystem, v: &dyn Valuation, depth: usize) -> Report {
    let names = Names { alphabet: &sys.alphabet, vars: &sys.vars };
    check_general(&sys.alphabet, names, &sys.relations, &sys.arith, v, depth)
}
