//! Small nondeterministic automata over label words.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::model::{Alphabet, Label};

/// An NFA with ε-moves. Words are read left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Nfa {
    pub n_labels: usize,
    pub start: BTreeSet<usize>,
    pub accept: Vec<bool>,
    pub eps: Vec<Vec<usize>>,
    pub delta: Vec<Vec<(Label, usize)>>,
}

impl Nfa {
    pub fn new(n_labels: usize) -> Self {
        Nfa { n_labels, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.accept.len()
    }

    pub fn is_empty_automaton(&self) -> bool {
        self.accept.is_empty()
    }

    pub fn add_state(&mut self, accepting: bool) -> usize {
        self.accept.push(accepting);
        self.eps.push(Vec::new());
        self.delta.push(Vec::new());
        self.accept.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, l: Label, to: usize) {
        if !self.delta[from].contains(&(l, to)) {
            self.delta[from].push((l, to));
        }
    }

    pub fn add_eps(&mut self, from: usize, to: usize) {
        if from != to && !self.eps[from].contains(&to) {
            self.eps[from].push(to);
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s] {
                if set.insert(t) {
                    stack.push(t);
                }
            }
        }
    }

    fn step(&self, set: &BTreeSet<usize>, l: Label) -> BTreeSet<usize> {
        let mut next = BTreeSet::new();
        for &s in set {
            for &(a, t) in &self.delta[s] {
                if a == l {
                    next.insert(t);
                }
            }
        }
        self.closure(&mut next);
        next
    }

    fn initial(&self) -> BTreeSet<usize> {
        let mut s = self.start.clone();
        self.closure(&mut s);
        s
    }

    pub fn accepts(&self, word: &[Label]) -> bool {
        let mut cur = self.initial();
        for &l in word {
            cur = self.step(&cur, l);
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|&s| self.accept[s])
    }

    /// The automaton of reversed words.
    pub fn reversed(&self) -> Nfa {
        let mut r = Nfa::new(self.n_labels);
        for _ in 0..self.len() {
            r.add_state(false);
        }
        for s in 0..self.len() {
            for &t in &self.eps[s] {
                r.add_eps(t, s);
            }
            for &(a, t) in &self.delta[s] {
                r.add_edge(t, a, s);
            }
            if self.accept[s] {
                r.start.insert(s);
            }
        }
        for &s in &self.start {
            r.accept[s] = true;
        }
        r
    }

    /// Copies `other`'s states into `self`, returning the offset.
    fn embed(&mut self, other: &Nfa) -> usize {
        let off = self.len();
        for s in 0..other.len() {
            self.add_state(other.accept[s]);
        }
        for s in 0..other.len() {
            for &t in &other.eps[s] {
                self.add_eps(off + s, off + t);
            }
            for &(a, t) in &other.delta[s] {
                self.add_edge(off + s, a, off + t);
            }
        }
        off
    }

    pub fn union(&self, other: &Nfa) -> Nfa {
        let mut u = self.clone();
        u.n_labels = u.n_labels.max(other.n_labels);
        let off = u.embed(other);
        u.start.extend(other.start.iter().map(|s| s + off));
        u
    }

    /// Product automaton over reachable pairs.
    pub fn intersect(&self, other: &Nfa) -> Nfa {
        let mut p = Nfa::new(self.n_labels.max(other.n_labels));
        let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        let mut a0 = self.start.clone();
        self.closure(&mut a0);
        let mut b0 = other.start.clone();
        other.closure(&mut b0);
        let mut intern = |p: &mut Nfa, q: &mut VecDeque<(usize, usize)>, pair: (usize, usize)| {
            *ids.entry(pair).or_insert_with(|| {
                q.push_back(pair);
                p.add_state(self.accept[pair.0] && other.accept[pair.1])
            })
        };
        for &a in &a0 {
            for &b in &b0 {
                let id = intern(&mut p, &mut queue, (a, b));
                p.start.insert(id);
            }
        }
        while let Some((a, b)) = queue.pop_front() {
            let from = intern(&mut p, &mut queue, (a, b));
            for &(l, a1) in &self.delta[a] {
                let mut sa = BTreeSet::from([a1]);
                self.closure(&mut sa);
                for &(l2, b1) in &other.delta[b] {
                    if l2 != l {
                        continue;
                    }
                    let mut sb = BTreeSet::from([b1]);
                    other.closure(&mut sb);
                    for &x in &sa {
                        for &y in &sb {
                            let to = intern(&mut p, &mut queue, (x, y));
                            p.add_edge(from, l, to);
                        }
                    }
                }
            }
        }
        p
    }

    pub fn determinize(&self) -> Dfa {
        let mut states: Vec<BTreeSet<usize>> = Vec::new();
        let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        let mut trans: Vec<Vec<usize>> = Vec::new();
        let init = self.initial();
        ids.insert(init.clone(), 0);
        states.push(init);
        let mut i = 0;
        while i < states.len() {
            let mut row = Vec::with_capacity(self.n_labels);
            for l in 0..self.n_labels as u32 {
                let next = self.step(&states[i], Label(l));
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        ids.insert(next.clone(), states.len());
                        states.push(next);
                        states.len() - 1
                    }
                };
                row.push(id);
            }
            trans.push(row);
            i += 1;
        }
        let accept = states.iter().map(|s| s.iter().any(|&q| self.accept[q])).collect();
        Dfa { trans, accept }
    }

    /// Some accepted word, shortest first.
    pub fn shortest_word(&self) -> Option<Vec<Label>> {
        self.determinize().shortest_word()
    }

    pub fn is_empty(&self) -> bool {
        self.shortest_word().is_none()
    }

    /// `Ok` when both automata accept the same words; otherwise a shortest
    /// word accepted by exactly one of them.
    pub fn equivalent(&self, other: &Nfa) -> Result<(), Vec<Label>> {
        let n = self.n_labels.max(other.n_labels);
        let mut a = self.clone();
        a.n_labels = n;
        let mut b = other.clone();
        b.n_labels = n;
        let (da, db) = (a.determinize(), b.determinize());
        let mut seen = BTreeSet::from([(0usize, 0usize)]);
        let mut queue = VecDeque::from([((0usize, 0usize), Vec::new())]);
        while let Some(((x, y), w)) = queue.pop_front() {
            if da.accept[x] != db.accept[y] {
                return Err(w);
            }
            for l in 0..n {
                let next = (da.trans[x][l], db.trans[y][l]);
                if seen.insert(next) {
                    let mut w2 = w.clone();
                    w2.push(Label(l as u32));
                    queue.push_back((next, w2));
                }
            }
        }
        Ok(())
    }

    /// Text graph: a `states` line, `start`/`accept` lines, then one edge per line.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "states {}", self.len());
        let starts: Vec<String> = self.start.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "start {}", starts.join(" "));
        let acc: Vec<String> =
            (0..self.len()).filter(|&q| self.accept[q]).map(|q| q.to_string()).collect();
        let _ = writeln!(s, "accept {}", acc.join(" "));
        for q in 0..self.len() {
            for &t in &self.eps[q] {
                let _ = writeln!(s, "{q} -> {t} ε");
            }
            for &(a, t) in &self.delta[q] {
                let _ = writeln!(s, "{q} -> {t} {}", alphabet.name(a));
            }
        }
        s
    }
}

/// A complete deterministic automaton with initial state 0.
#[derive(Clone, Debug)]
pub struct Dfa {
    pub trans: Vec<Vec<usize>>,
    pub accept: Vec<bool>,
}

impl Dfa {
    pub fn shortest_word(&self) -> Option<Vec<Label>> {
        let mut prev: Vec<Option<(usize, Label)>> = vec![None; self.trans.len()];
        let mut seen = vec![false; self.trans.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(s) = queue.pop_front() {
            if self.accept[s] {
                let mut w = Vec::new();
                let mut cur = s;
                while let Some((p, l)) = prev[cur] {
                    w.push(l);
                    cur = p;
                }
                w.reverse();
                return Some(w);
            }
            for (l, &t) in self.trans[s].iter().enumerate() {
                if !seen[t] {
                    seen[t] = true;
                    prev[t] = Some((s, Label(l as u32)));
                    queue.push_back(t);
                }
            }
        }
        None
    }
}
