use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use super::{iset_add, iset_sub, Hi, Interval, IntervalSet, LinearForm, Lo};
use crate::ext::{ExtValue, Rational};
use crate::lp::{LinearProgram, LpConstraint, LpForm, Witness};
use crate::model::{ArithAtom, ConstraintSystem, LabelWord, Names, Node, Rel, TreeExpr};
use crate::normal::{NfConstraint, NfRel, NormalFormSystem};
use crate::reach::Reach;
use crate::unfold::WindowScheme;

/// Arithmetic variables fixed to zero and to infinity; the others are
/// positive and finite.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    pub zero: BTreeSet<Node>,
    pub inf: BTreeSet<Node>,
}

impl Pattern {
    pub fn size(&self) -> usize {
        self.zero.len() + self.inf.len()
    }

    fn class_of(&self, names: &Names<'_>, n: &Node) -> IntervalSet {
        if self.zero.contains(n) {
            IntervalSet::zero()
        } else if self.inf.contains(n) {
            IntervalSet::inf()
        } else {
            IntervalSet::of([Interval::point(LinearForm::var(names.root(n)))])
        }
    }

    pub fn describe(&self, names: &Names<'_>) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        for n in &self.zero {
            m.insert(names.root(n), "0".to_string());
        }
        for n in &self.inf {
            m.insert(names.root(n), "inf".to_string());
        }
        m
    }
}

/// Classes for the levels from `n` up to `start + 2·period`.
#[derive(Clone, Debug)]
pub struct Stable {
    pub n: usize,
    pub start: usize,
    pub period: usize,
    pub pattern: Pattern,
    pub classes: BTreeMap<Node, IntervalSet>,
    /// Arithmetic variables that a collapsed cycle forces to zero.
    pub extra_zero: BTreeSet<Node>,
}

#[derive(Clone, Debug)]
pub enum PropagationOutcome {
    Stabilized(Stable),
    /// Levels computed and the number of distinct classes on each.
    BudgetExceeded { level: usize, trace: Vec<usize> },
    ImmediateConflict { node: Node },
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("infinity conflict: {0}")]
pub struct InfinityConflict(pub String);

/// Propagation state for one pattern.
pub struct Propagation<'a> {
    nf: &'a NormalFormSystem,
    pattern: &'a Pattern,
    reach: Reach,
    pub period: usize,
    by_lhs: BTreeMap<Node, Vec<NfConstraint>>,
    order_pos: BTreeMap<Node, usize>,
    lo_carriers: Vec<Node>,
    hi_carriers: Vec<Node>,
    pub classes: BTreeMap<Node, IntervalSet>,
    pub extra_zero: BTreeSet<Node>,
    /// Nodes bounded in both directions.
    pub in_l: BTreeSet<Node>,
    /// Next level to compute.
    pub level: usize,
    pub trace: Vec<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
enum Bounded {
    Zero,
    Inf,
    Both,
}

impl<'a> Propagation<'a> {
    pub fn new(sys: &ConstraintSystem, nf: &'a NormalFormSystem, pattern: &'a Pattern) -> Self {
        let carriers: Vec<Node> =
            nf.arith_vars.iter().filter_map(|v| match v { crate::normal::ArithVar::Node(n) => Some(n.clone()), _ => None }).collect();
        Propagation {
            nf,
            pattern,
            reach: Reach::for_system(sys),
            period: super::compute_s(sys),
            by_lhs: nf.by_lhs(),
            order_pos: nf.collapsed.order.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect(),
            lo_carriers: carriers.clone(),
            hi_carriers: carriers,
            classes: BTreeMap::new(),
            extra_zero: BTreeSet::new(),
            in_l: BTreeSet::new(),
            level: nf.n,
            trace: Vec::new(),
        }
    }

    fn class_of(&self, n: &Node) -> IntervalSet {
        if n.level() < self.nf.n {
            self.pattern.class_of(&self.nf.names(), n)
        } else {
            self.classes.get(n).cloned().unwrap_or_else(IntervalSet::zero)
        }
    }

    fn split(&self, n: &Node) -> (LabelWord, Node) {
        let cut = n.level() - self.nf.n;
        (LabelWord(n.word.0[..cut].to_vec()), Node::new(LabelWord(n.word.0[cut..].to_vec()), n.var))
    }

    fn rep(&self, n: &Node) -> Node {
        let (p, base) = self.split(n);
        self.nf.collapsed.rep_of(&base).under(&p)
    }

    fn bounded(&self, n: &Node) -> Result<Bounded, ()> {
        let pat = self.pattern;
        let lo_inf = self.lo_carriers.iter().filter(|a| pat.inf.contains(*a)).any(|a| self.reach.entails_nodes(n, a));
        let hi_zero = self.hi_carriers.iter().filter(|b| pat.zero.contains(*b)).any(|b| self.reach.entails_nodes(b, n));
        let lo = self.lo_carriers.iter().filter(|a| !pat.zero.contains(*a)).any(|a| self.reach.entails_nodes(n, a));
        let hi = self.hi_carriers.iter().filter(|b| !pat.inf.contains(*b)).any(|b| self.reach.entails_nodes(b, n));
        match (lo_inf, hi_zero) {
            (true, true) => Err(()),
            (true, false) if hi => Err(()),
            (true, false) => Ok(Bounded::Inf),
            (false, true) if lo => Err(()),
            (false, true) => Ok(Bounded::Zero),
            (false, false) => Ok(match (lo, hi) {
                (true, true) => Bounded::Both,
                (true, false) => Bounded::Inf,
                _ => Bounded::Zero,
            }),
        }
    }

    fn lifted(&self, n: &Node) -> Vec<NfConstraint> {
        let (p, base) = self.split(n);
        self.by_lhs.get(&base).map(|cs| cs.iter().map(|c| c.under(&p)).collect()).unwrap_or_default()
    }

    fn sum_lower(&self, terms: &[TreeExpr]) -> IntervalSet {
        let mut acc = IntervalSet::of([Interval::at_least(Lo::zero())]);
        for t in terms {
            acc = iset_add(&acc, &self.class_of(&t.node).scale(&t.coeff));
        }
        acc
    }

    fn upper(&self, c: &NfConstraint) -> IntervalSet {
        let mut acc = IntervalSet::zero();
        for t in &c.pos {
            // a single greater summand in every normalized upper bound
            acc = iset_sub(&self.class_of(&t.node).scale(&t.coeff), &acc);
        }
        for t in &c.neg {
            acc = iset_sub(&acc, &self.class_of(&t.node).scale(&t.coeff));
        }
        acc
    }

    /// Computes the classes of the next level. Returns a node whose class is
    /// empty for every valuation.
    pub fn step(&mut self) -> Result<(), Node> {
        let lvl = self.level;
        let nodes: Vec<Node> = self
            .nf
            .alphabet
            .words_of_len(lvl)
            .into_iter()
            .flat_map(|w| (0..self.nf.vars.len()).map(move |x| Node::new(w.clone(), crate::model::VarId(x as u32))))
            .collect();
        let mut groups: BTreeMap<Node, Vec<Node>> = BTreeMap::new();
        for n in &nodes {
            match self.bounded(n).map_err(|_| n.clone())? {
                Bounded::Zero => {
                    self.classes.insert(n.clone(), IntervalSet::zero());
                }
                Bounded::Inf => {
                    self.classes.insert(n.clone(), IntervalSet::inf());
                }
                Bounded::Both => {
                    self.in_l.insert(n.clone());
                    groups.entry(self.rep(n)).or_default().push(n.clone())
                }
            }
        }
        let pos = |s: &Self, r: &Node| s.order_pos.get(&s.split(r).1).copied();
        let mut order: Vec<Node> = groups.keys().cloned().collect();
        order.sort_by_key(|r| (pos(self, r).map_or(0, |p| p + 1), r.clone()));
        let in_group = |s: &Self, rep: &Node, t: &TreeExpr| t.node.level() == lvl && s.rep(&t.node) == *rep;
        for rep in order.iter().rev() {
            let mut lowers = IntervalSet::default();
            for m in &groups[rep] {
                for c in self.lifted(m).iter().filter(|c| c.rel == NfRel::Geq) {
                    if c.pos.iter().any(|t| in_group(self, rep, t)) {
                        continue;
                    }
                    lowers = lowers.union(&self.sum_lower(&c.pos));
                }
            }
            if lowers.is_empty() {
                lowers = IntervalSet::of([Interval::at_least(Lo::zero())]);
            }
            for m in &groups[rep] {
                self.classes.insert(m.clone(), lowers.clone());
            }
        }
        for rep in &order {
            let mut class = self.classes[&groups[rep][0]].clone();
            for m in &groups[rep] {
                for c in self.lifted(m).iter().filter(|c| c.rel == NfRel::Leq) {
                    if c.summands().any(|t| in_group(self, rep, t)) {
                        continue;
                    }
                    class = class.union(&self.upper(c));
                }
            }
            for m in &groups[rep] {
                self.classes.insert(m.clone(), class.clone());
            }
        }
        for (rep0, z0) in &self.nf.collapsed.zero_forced {
            for p in self.nf.alphabet.words_of_len(lvl - self.nf.n) {
                let (rep, z) = (rep0.under(&p), z0.under(&p));
                if self.classes.get(&rep).is_some_and(IntervalSet::is_inf) {
                    continue;
                }
                if z.level() < self.nf.n {
                    if self.pattern.inf.contains(&z) {
                        return Err(z);
                    }
                    self.extra_zero.insert(z);
                } else if let Some(c) = self.classes.get_mut(&z) {
                    *c = c.union(&IntervalSet::zero());
                }
            }
        }
        let mut distinct = BTreeSet::new();
        for n in &nodes {
            let c = &self.classes[n];
            if c.concretely_empty() {
                return Err(n.clone());
            }
            distinct.insert(c.clone());
        }
        self.trace.push(distinct.len());
        self.level += 1;
        Ok(())
    }
}

/// Smallest `t ≥ n` such that `I(p·x) = I(x)` for every node `x` of `L` on
/// levels `t..=t+S` and every word `p` of length `S` with `p·x` in `L`.
pub fn stabilization_check(st: &Propagation<'_>) -> Option<usize> {
    let s = st.period;
    let top = st.level.checked_sub(1)?;
    let words = st.nf.alphabet.words_of_len(s);
    let mut t = st.nf.n;
    while t + 2 * s <= top {
        let ok = (t..=t + s).all(|lvl| {
            st.in_l.iter().filter(|n| n.level() == lvl).all(|n| {
                let c = st.classes.get(n);
                words.iter().map(|p| n.under(p)).filter(|m| st.in_l.contains(m)).all(|m| st.classes.get(&m) == c)
            })
        });
        if ok {
            return Some(t);
        }
        t += 1;
    }
    None
}

/// Runs propagation for at most `budget` levels past the normal-form level.
pub fn propagate(
    sys: &ConstraintSystem,
    nf: &NormalFormSystem,
    pattern: &Pattern,
    budget: usize,
) -> PropagationOutcome {
    let mut st = Propagation::new(sys, nf, pattern);
    loop {
        if st.level > nf.n + budget {
            return PropagationOutcome::BudgetExceeded { level: st.level, trace: st.trace };
        }
        if let Err(node) = st.step() {
            return PropagationOutcome::ImmediateConflict { node };
        }
        if nf.alphabet.is_empty() {
            // a single level holds every node
            return PropagationOutcome::Stabilized(Stable {
                n: nf.n,
                start: nf.n,
                period: st.period,
                pattern: pattern.clone(),
                classes: st.classes,
                extra_zero: st.extra_zero,
            });
        }
        if let Some(t) = stabilization_check(&st) {
            return PropagationOutcome::Stabilized(Stable {
                n: nf.n,
                start: t,
                period: st.period,
                pattern: pattern.clone(),
                classes: st.classes,
                extra_zero: st.extra_zero,
            });
        }
    }
}

/// Splits a signed form into `(positive part, negated negative part)`.
fn split_signed(f: &LinearForm) -> (LpForm, LpForm) {
    let (mut p, mut m) = (LpForm::default(), LpForm::default());
    for (v, c) in &f.terms {
        if *c > Rational::zero() {
            p.add(v.clone(), c.clone());
        } else {
            m.add(v.clone(), -c.clone());
        }
    }
    if f.constant > Rational::zero() {
        p.constant = f.constant.clone();
    } else {
        m.constant = -f.constant.clone();
    }
    (p, m)
}

pub const EPS: &str = "$eps";

/// The program whose feasibility decides the pattern: the arithmetic
/// constraints under the pattern, `ℓ ≤ u` for every lower and upper endpoint
/// of every class, and positivity of the free variables.
pub fn emit_lp(stable: &Stable, nf: &NormalFormSystem) -> Result<LinearProgram, InfinityConflict> {
    let names = nf.names();
    let pat = &stable.pattern;
    let mut lp = LinearProgram::new();
    let mut seen = BTreeSet::new();
    let mut push = |lp: &mut LinearProgram, c: LpConstraint| {
        if seen.insert(c.clone()) {
            lp.push(c);
        }
    };
    for c in &nf.arith {
        let side = |s: &crate::model::ArithSide| -> Option<LpForm> {
            let mut f = LpForm::constant(s.constant.clone());
            for (a, k) in &s.terms {
                match a {
                    ArithAtom::Root(n) if pat.zero.contains(n) => {}
                    ArithAtom::Root(n) if pat.inf.contains(n) => return None,
                    _ => f.add(names.atom(a), k.clone()),
                }
            }
            Some(f)
        };
        let (l, r) = (side(&c.lhs), side(&c.rhs));
        let text = || names.arith_constraint(c);
        match (l, r, c.rel) {
            (Some(l), Some(r), rel) => push(&mut lp, LpConstraint::new(l, rel, r)),
            (None, None, _) | (None, Some(_), Rel::Ge) | (Some(_), None, Rel::Le) => {}
            _ => return Err(InfinityConflict(text())),
        }
    }
    for z in &stable.extra_zero {
        push(&mut lp, LpConstraint::new(LpForm::var(names.root(z)), Rel::Eq, LpForm::default()));
    }
    for (node, class) in &stable.classes {
        for lo in class.lowers() {
            for hi in class.uppers() {
                match (lo, hi) {
                    (_, Hi::Inf) => {}
                    (Lo::Inf, _) | (_, Hi::Empty) => {
                        return Err(InfinityConflict(format!("{} in {class}", names.node(node))))
                    }
                    (Lo::Fin(l), Hi::Fin(h)) => {
                        let mut gap = h.clone();
                        gap.constant -= &l.constant;
                        for (v, k) in &l.terms {
                            gap.add(v.clone(), -k.clone());
                        }
                        if super::nonneg(&gap) {
                            continue;
                        }
                        let (p, m) = split_signed(&gap);
                        push(&mut lp, LpConstraint::new(m, Rel::Le, p));
                    }
                }
            }
        }
    }
    let free: Vec<String> = nf
        .arith_vars
        .iter()
        .filter_map(|v| match v {
            crate::normal::ArithVar::Node(n) if !pat.zero.contains(n) && !pat.inf.contains(n) => Some(names.root(n)),
            _ => None,
        })
        .collect();
    if !free.is_empty() {
        for v in &free {
            push(&mut lp, LpConstraint::new(LpForm::var(v.clone()), Rel::Ge, LpForm::var(EPS)));
            lp.add_var(v.clone());
        }
        push(&mut lp, LpConstraint::new(LpForm::var(EPS), Rel::Le, LpForm::constant(Rational::one())));
        lp.maximize = Some(EPS.to_string());
    }
    for l in nf.arith.iter().flat_map(|c| c.atoms()) {
        if let ArithAtom::Lambda(_) = l {
            lp.add_var(names.atom(l));
        }
    }
    Ok(lp)
}

/// Values from the classes: each node takes the largest of its lower
/// endpoints under the witness, with the period rule beyond the window.
pub fn scheme_from_classes(stable: &Stable, nf: &NormalFormSystem, w: &Witness) -> WindowScheme {
    let names = nf.names();
    let pat = &stable.pattern;
    let mut arith: Witness = w.clone();
    for n in &pat.zero {
        arith.insert(names.root(n), ExtValue::zero());
    }
    for n in &pat.inf {
        arith.insert(names.root(n), ExtValue::Inf);
    }
    let mut table = BTreeMap::new();
    for x in 0..nf.vars.len() {
        let x = crate::model::VarId(x as u32);
        for word in nf.alphabet.words_below(nf.n) {
            let n = Node::new(word, x);
            let v = arith.get(&names.root(&n)).cloned().unwrap_or_else(ExtValue::zero);
            table.insert(n, v);
        }
    }
    let boundary = stable.start;
    for (n, class) in &stable.classes {
        if n.level() >= boundary + stable.period {
            continue;
        }
        let v = class.lowers().filter_map(|l| l.eval(&arith)).max().unwrap_or_else(ExtValue::zero);
        table.insert(n.clone(), v);
    }
    let lambdas = arith.iter().filter(|(k, _)| k.starts_with('$') && k.as_str() != EPS).map(|(k, v)| (k[1..].to_string(), v.clone())).collect();
    WindowScheme { boundary, period: stable.period, table, lambdas }
}

/// Printable class table.
pub fn show_classes(stable: &Stable, names: &Names<'_>) -> BTreeMap<String, Vec<String>> {
    stable
        .classes
        .iter()
        .map(|(n, c)| (names.node(n), c.iter().map(|i| i.to_string()).collect()))
        .collect()
}
