//! Derivability of `u x ≥ v y` from unilateral tree constraints, and the
//! regular languages of entailed bounds.
//!
//! Public automata read words in written (outermost-first) order.

mod nfa;
mod pds;

use crate::model::{ConstraintSystem, Label, LabelWord, Node, TreeConstraint};

pub use nfa::{Dfa, Nfa};
pub use pds::{build_pushdown, saturate, Move, PushdownSystem, ReachPairs, StateSet, Transition};

/// A saturated pushdown system ready for entailment queries.
#[derive(Clone, Debug)]
pub struct Reach {
    pub pds: PushdownSystem,
    pub q: ReachPairs,
    n_labels: usize,
    /// `pops[a]` and `pushes[a]`: `(from, to)` pairs per label.
    pops: Vec<Vec<(usize, usize)>>,
    pushes: Vec<Vec<(usize, usize)>>,
}

fn lcp(a: &[Label], b: &[Label]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Reach {
    pub fn new(tree: &[TreeConstraint], n_vars: usize, n_labels: usize) -> Self {
        let pds = build_pushdown(tree, n_vars);
        let q = saturate(&pds);
        let n_labels = n_labels.max(
            pds.transitions
                .iter()
                .filter_map(|t| match t.mv {
                    Move::Pop(a) | Move::Push(a) => Some(a.0 as usize + 1),
                    Move::Plain => None,
                })
                .max()
                .unwrap_or(0),
        );
        let mut pops = vec![Vec::new(); n_labels];
        let mut pushes = vec![Vec::new(); n_labels];
        for t in &pds.transitions {
            match t.mv {
                Move::Pop(a) => pops[a.0 as usize].push((t.from, t.to)),
                Move::Push(a) => pushes[a.0 as usize].push((t.from, t.to)),
                Move::Plain => {}
            }
        }
        Reach { pds, q, n_labels, pops, pushes }
    }

    pub fn for_system(sys: &ConstraintSystem) -> Self {
        Self::new(&sys.tree, sys.vars.len(), sys.alphabet.len())
    }

    pub fn n_states(&self) -> usize {
        self.pds.n_states
    }

    fn close(&self, s: &StateSet, rel: &[StateSet]) -> StateSet {
        let mut out = StateSet::new(self.n_states());
        for x in s.iter() {
            out.union_with(&rel[x]);
        }
        out
    }

    fn qpost(&self, s: &StateSet) -> StateSet {
        self.close(s, &self.q.post)
    }

    fn qpre(&self, s: &StateSet) -> StateSet {
        self.close(s, &self.q.pre)
    }

    fn edges<'a>(&self, table: &'a [Vec<(usize, usize)>], a: Label) -> &'a [(usize, usize)] {
        table.get(a.0 as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `S[j]`: states reachable from `x` after popping `u[j..]`.
    pub fn pop_sets(&self, x: usize, u: &[Label]) -> Vec<StateSet> {
        let n = self.n_states();
        let mut out = vec![StateSet::new(n); u.len() + 1];
        out[u.len()] = self.q.post[x].clone();
        for j in (0..u.len()).rev() {
            let mut next = StateSet::new(n);
            for &(f, t) in self.edges(&self.pops, u[j]) {
                if out[j + 1].contains(f) {
                    next.insert(t);
                }
            }
            out[j] = self.qpost(&next);
        }
        out
    }

    /// `R[j]`: states from which pushing `v[j..]` can end in state `y`.
    pub fn push_sets(&self, v: &[Label], y: usize) -> Vec<StateSet> {
        let n = self.n_states();
        let mut out = vec![StateSet::new(n); v.len() + 1];
        out[v.len()] = self.q.pre[y].clone();
        for j in (0..v.len()).rev() {
            let mut prev = StateSet::new(n);
            for &(f, t) in self.edges(&self.pushes, v[j]) {
                if out[j + 1].contains(t) {
                    prev.insert(f);
                }
            }
            out[j] = self.qpre(&prev);
        }
        out
    }

    /// Whether `u x ≥ v y` is derivable.
    pub fn entails(&self, u: &LabelWord, x: usize, v: &LabelWord, y: usize) -> bool {
        let s = self.pop_sets(x, &u.0);
        let r = self.push_sets(&v.0, y);
        (0..=lcp(&u.0, &v.0)).any(|j| s[j].intersects(&r[j]))
    }

    pub fn entails_nodes(&self, greater: &Node, lesser: &Node) -> bool {
        self.entails(&greater.word, greater.var.0 as usize, &lesser.word, lesser.var.0 as usize)
    }

    /// Copies of the state space with Q-closed letter moves of one kind.
    fn embed_moves(&self, nfa: &mut Nfa, table: &[Vec<(usize, usize)>], reverse: bool) -> usize {
        let n = self.n_states();
        let off = nfa.len();
        for _ in 0..n {
            nfa.add_state(false);
        }
        for (a, edges) in table.iter().enumerate() {
            for &(f, t) in edges {
                let sources = self.q.pre[f].iter().collect::<Vec<_>>();
                for s in sources {
                    for d in self.q.post[t].iter() {
                        if reverse {
                            nfa.add_edge(off + d, Label(a as u32), off + s);
                        } else {
                            nfa.add_edge(off + s, Label(a as u32), off + d);
                        }
                    }
                }
            }
        }
        off
    }

    /// Written-order automaton for `{w | w·u x ≥ v y}`.
    pub fn language_for(&self, u: &LabelWord, x: usize, v: &LabelWord, y: usize) -> Nfa {
        let mut nfa = Nfa::new(self.n_labels);
        let v = &v.0;
        let chain: Vec<usize> = (0..=v.len()).map(|_| nfa.add_state(false)).collect();
        nfa.start.insert(chain[0]);
        for i in 0..v.len() {
            nfa.add_edge(chain[i], v[i], chain[i + 1]);
        }
        // words that are prefixes of v: the run may dip into u
        for (i, &c) in chain.iter().enumerate() {
            let mut w = LabelWord(v[..i].to_vec());
            w = w.concat(u);
            if self.entails(&w, x, &LabelWord(v.clone()), y) {
                nfa.accept[c] = true;
            }
        }
        // otherwise w = v[..j]·w' with w'·u popped completely
        let after_u = self.pop_sets(x, &u.0)[0].clone();
        let r = self.push_sets(v, y);
        for (j, &c) in chain.iter().enumerate() {
            if r[j].is_empty() {
                continue;
            }
            let off = self.embed_moves(&mut nfa, &self.pops, true);
            for s in r[j].iter() {
                nfa.add_eps(c, off + s);
            }
            for s in after_u.iter() {
                nfa.accept[off + s] = true;
            }
        }
        nfa
    }

    /// Written-order automaton for `{w | v y ≥ w t}`.
    pub fn language_below(&self, v: &LabelWord, y: usize, t: usize) -> Nfa {
        let mut nfa = Nfa::new(self.n_labels);
        let v = &v.0;
        let chain: Vec<usize> = (0..=v.len()).map(|_| nfa.add_state(false)).collect();
        nfa.start.insert(chain[0]);
        for i in 0..v.len() {
            nfa.add_edge(chain[i], v[i], chain[i + 1]);
        }
        let p = self.pop_sets(y, v);
        for (j, &c) in chain.iter().enumerate() {
            if p[j].is_empty() {
                continue;
            }
            let off = self.embed_moves(&mut nfa, &self.pushes, false);
            for s in p[j].iter() {
                nfa.add_eps(c, off + s);
            }
            for s in self.q.pre[t].iter() {
                nfa.accept[off + s] = true;
            }
        }
        nfa
    }
}

/// Convenience wrapper over [`Reach::entails`].
pub fn entails(sys: &ConstraintSystem, u: &LabelWord, x: usize, v: &LabelWord, y: usize) -> bool {
    Reach::for_system(sys).entails(u, x, v, y)
}

/// Entailed bounds between tree nodes and a list of carrier nodes.
///
/// Carrier `a` bounds node `X` from below when `X ≥ a` is derivable and from
/// above when `a ≥ X` is.
#[derive(Clone, Debug)]
pub struct BoundedLanguages {
    pub reach: Reach,
    pub carriers: Vec<Node>,
    below: Vec<Vec<StateSet>>,
    above: Vec<Vec<StateSet>>,
}

pub fn bounded_languages(reach: Reach, carriers: Vec<Node>) -> BoundedLanguages {
    let below = carriers.iter().map(|c| reach.push_sets(&c.word.0, c.var.0 as usize)).collect();
    let above = carriers.iter().map(|c| reach.pop_sets(c.var.0 as usize, &c.word.0)).collect();
    BoundedLanguages { reach, carriers, below, above }
}

impl BoundedLanguages {
    /// Carriers `a` with `node ≥ a` derivable.
    pub fn lower_bounds(&self, node: &Node) -> Vec<usize> {
        let u = &node.word.0;
        let s = self.reach.pop_sets(node.var.0 as usize, u);
        (0..self.carriers.len())
            .filter(|&a| {
                let k = lcp(u, &self.carriers[a].word.0);
                (0..=k).any(|j| s[j].intersects(&self.below[a][j]))
            })
            .collect()
    }

    /// Carriers `b` with `b ≥ node` derivable.
    pub fn upper_bounds(&self, node: &Node) -> Vec<usize> {
        let u = &node.word.0;
        let r = self.reach.push_sets(u, node.var.0 as usize);
        (0..self.carriers.len())
            .filter(|&b| {
                let k = lcp(u, &self.carriers[b].word.0);
                (0..=k).any(|j| self.above[b][j].intersects(&r[j]))
            })
            .collect()
    }

    /// Words `w` with `w x ≥ a`.
    pub fn geq_automaton(&self, a: usize, x: usize) -> Nfa {
        let c = &self.carriers[a];
        self.reach.language_for(&LabelWord::empty(), x, &c.word, c.var.0 as usize)
    }

    /// Words `w` with `b ≥ w x`.
    pub fn leq_automaton(&self, b: usize, x: usize) -> Nfa {
        let c = &self.carriers[b];
        self.reach.language_below(&c.word, c.var.0 as usize, x)
    }

    /// Union of `geq(a) ∩ leq(b)` over the allowed carriers.
    pub fn bounded_automaton(&self, x: usize, lower: &[usize], upper: &[usize]) -> Nfa {
        let mut acc = Nfa::new(self.reach.n_labels);
        let uppers: Vec<Nfa> = upper.iter().map(|&b| self.leq_automaton(b, x)).collect();
        for &a in lower {
            let g = self.geq_automaton(a, x);
            for l in &uppers {
                acc = acc.union(&g.intersect(l));
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_system;

    fn words(sys: &ConstraintSystem, s: &str) -> LabelWord {
        sys.alphabet.parse_word(s).unwrap()
    }

    #[test]
    fn chain_shapes() {
        let sys = parse_system("l r x >= r r x + l y").unwrap();
        let pds = build_pushdown(&sys.tree, 2);
        let l = sys.alphabet.lookup("l").unwrap();
        let r = sys.alphabet.lookup("r").unwrap();
        // pop r then l, then push r r back to x or l to y
        let pops: Vec<_> = pds.transitions.iter().filter(|t| matches!(t.mv, Move::Pop(_))).collect();
        assert_eq!(pops.len(), 2);
        assert!(pds.transitions.contains(&Transition { from: 0, mv: Move::Pop(r), to: 2 }));
        assert!(pds.transitions.contains(&Transition { from: 2, mv: Move::Pop(l), to: 3 }));
        assert!(pds.transitions.contains(&Transition { from: 3, mv: Move::Push(l), to: 1 }));
        let q = saturate(&pds);
        assert!(q.contains(0, 0) && q.contains(1, 1));
        assert!(!q.contains(0, 1));
    }

    #[test]
    fn plain_and_empty_systems() {
        let sys = parse_system("x >= y").unwrap();
        let q = saturate(&build_pushdown(&sys.tree, 2));
        assert!(q.contains(0, 1) && q.contains(0, 0) && q.contains(1, 1));
        assert!(!q.contains(1, 0));
        let q = saturate(&build_pushdown(&[], 3));
        assert_eq!(q.pairs(), vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn chain_entailments() {
        let sys = parse_system("l x >= x\nx >= r z\nl r z >= l l y\nl y >= y").unwrap();
        let reach = Reach::for_system(&sys);
        let (x, y) = (0, sys.var_id("y").unwrap().0 as usize);
        assert!(reach.entails(&words(&sys, "l"), x, &LabelWord::empty(), y));
        assert!(!reach.entails(&LabelWord::empty(), x, &LabelWord::empty(), y));
        assert!(reach.entails(&words(&sys, "l l l"), x, &LabelWord::empty(), y));
        let lang = reach.language_for(&LabelWord::empty(), x, &LabelWord::empty(), y);
        assert!(lang.accepts(&words(&sys, "l l").0));
        assert!(!lang.accepts(&[]));
        let quot = reach.language_for(&words(&sys, "l"), x, &LabelWord::empty(), y);
        assert!(quot.accepts(&[]));
    }

    #[test]
    fn reflexive_everywhere() {
        let sys = parse_system("l x >= r y").unwrap();
        let reach = Reach::for_system(&sys);
        for w in ["", "l", "r l"] {
            let w = words(&sys, w);
            assert!(reach.entails(&w, 0, &w, 0));
        }
        assert!(reach.language_for(&LabelWord::empty(), 1, &LabelWord::empty(), 1).accepts(&[]));
    }
}
