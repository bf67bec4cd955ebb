//! Pushdown system of a set of tree constraints and its saturation.

use num_traits::One;

use crate::ext::Rational;
use crate::model::{Label, TreeConstraint};

/// Fixed-size bit set over states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateSet {
    bits: Vec<u64>,
}

impl StateSet {
    pub fn new(n: usize) -> Self {
        StateSet { bits: vec![0; n.div_ceil(64)] }
    }

    pub fn singleton(n: usize, s: usize) -> Self {
        let mut x = Self::new(n);
        x.insert(s);
        x
    }

    pub fn insert(&mut self, s: usize) -> bool {
        let (w, b) = (s / 64, 1u64 << (s % 64));
        let fresh = self.bits[w] & b == 0;
        self.bits[w] |= b;
        fresh
    }

    pub fn contains(&self, s: usize) -> bool {
        self.bits[s / 64] & (1u64 << (s % 64)) != 0
    }

    /// Adds all of `other`; returns whether anything changed.
    pub fn union_with(&mut self, other: &StateSet) -> bool {
        let mut changed = false;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            let n = *a | *b;
            changed |= n != *a;
            *a = n;
        }
        changed
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| a & b != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w & (1u64 << b) != 0).map(move |b| i * 64 + b)
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Plain,
    Pop(Label),
    Push(Label),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: usize,
    pub mv: Move,
    pub to: usize,
}

/// States `0..n_vars` are the tree variables; the rest are auxiliary.
///
/// The stack holds a label word with its innermost label on top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushdownSystem {
    pub n_vars: usize,
    pub n_states: usize,
    pub transitions: Vec<Transition>,
    /// For each auxiliary state, the constraint index and chain position
    /// that created it.
    pub aux: Vec<(usize, usize)>,
}

impl PushdownSystem {
    fn fresh(&mut self, constraint: usize) -> usize {
        let pos = self.aux.iter().filter(|(c, _)| *c == constraint).count();
        self.aux.push((constraint, pos));
        self.n_states += 1;
        self.n_states - 1
    }

    pub fn state_name(&self, s: usize, vars: &[String]) -> String {
        if s < self.n_vars {
            vars[s].clone()
        } else {
            let (c, p) = self.aux[s - self.n_vars];
            format!("c{c}.{p}")
        }
    }
}

/// Builds the pushdown system: each constraint pops its greater side's word
/// from the variable's state, then pushes one summand's word.
pub fn build_pushdown(tree: &[TreeConstraint], n_vars: usize) -> PushdownSystem {
    let mut pds = PushdownSystem { n_vars, n_states: n_vars, transitions: Vec::new(), aux: Vec::new() };
    for (ci, c) in tree.iter().enumerate() {
        let mut cur = c.lhs.var.0 as usize;
        for &a in c.lhs.word.0.iter().rev() {
            let next = pds.fresh(ci);
            pds.transitions.push(Transition { from: cur, mv: Move::Pop(a), to: next });
            cur = next;
        }
        let hub = cur;
        // summands with coefficient below one do not bound the greater side
        for t in c.rhs.iter().filter(|t| t.coeff >= Rational::one()) {
            let target = t.node.var.0 as usize;
            let word = &t.node.word.0;
            if word.is_empty() {
                pds.transitions.push(Transition { from: hub, mv: Move::Plain, to: target });
                continue;
            }
            let mut cur = hub;
            for (k, &a) in word.iter().enumerate() {
                let next = if k + 1 == word.len() { target } else { pds.fresh(ci) };
                pds.transitions.push(Transition { from: cur, mv: Move::Push(a), to: next });
                cur = next;
            }
        }
    }
    pds.transitions.sort();
    pds.transitions.dedup();
    pds
}

/// Balanced reachability: `(x, y)` such that `x` reaches `y` leaving the
/// stack unchanged and never going below it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachPairs {
    pub post: Vec<StateSet>,
    pub pre: Vec<StateSet>,
}

impl ReachPairs {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.post[x].contains(y)
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.post.len()).flat_map(|x| self.post[x].iter().map(move |y| (x, y))).collect()
    }
}

/// Least set closed under plain moves, push–balanced–pop, reflexivity and
/// transitivity.
pub fn saturate(pds: &PushdownSystem) -> ReachPairs {
    let n = pds.n_states;
    let mut post: Vec<StateSet> = (0..n).map(|s| StateSet::singleton(n, s)).collect();
    for t in &pds.transitions {
        if t.mv == Move::Plain {
            post[t.from].insert(t.to);
        }
    }
    let pushes: Vec<&Transition> =
        pds.transitions.iter().filter(|t| matches!(t.mv, Move::Push(_))).collect();
    let pops: Vec<&Transition> = pds.transitions.iter().filter(|t| matches!(t.mv, Move::Pop(_))).collect();
    loop {
        // transitive closure, Warshall style
        for k in 0..n {
            let row_k = post[k].clone();
            for row in post.iter_mut() {
                if row.contains(k) {
                    row.union_with(&row_k);
                }
            }
        }
        let mut changed = false;
        for p in &pushes {
            let Move::Push(a) = p.mv else { unreachable!() };
            for q in &pops {
                if q.mv == Move::Pop(a) && post[p.to].contains(q.from) {
                    changed |= post[p.from].insert(q.to);
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut pre: Vec<StateSet> = (0..n).map(|_| StateSet::new(n)).collect();
    for (x, row) in post.iter().enumerate() {
        for y in row.iter() {
            pre[y].insert(x);
        }
    }
    ReachPairs { post, pre }
}
