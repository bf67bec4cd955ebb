//! Level-`n` normal form: every tree constraint has a greater side of word
//! length exactly `n`, and every node above that level is an arithmetic
//! variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::ext::Rational;
use crate::model::{
    Alphabet, ArithAtom, ArithConstraint, ConstraintSystem, LabelWord, Names, Node, TreeConstraint, TreeExpr,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundKind {
    Lower,
    Upper,
    Undirected,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NfRel {
    /// `lhs ≥ Σ pos`
    Geq,
    /// `lhs ≤ Σ pos − Σ neg`
    Leq,
}

/// A constraint whose left-hand node has word length `n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NfConstraint {
    pub lhs: Node,
    pub rel: NfRel,
    pub pos: Vec<TreeExpr>,
    pub neg: Vec<TreeExpr>,
    pub kind: BoundKind,
}

impl NfConstraint {
    pub fn under(&self, prefix: &LabelWord) -> NfConstraint {
        let lift = |v: &Vec<TreeExpr>| {
            v.iter().map(|t| TreeExpr { coeff: t.coeff.clone(), node: t.node.under(prefix) }).collect()
        };
        NfConstraint {
            lhs: self.lhs.under(prefix),
            rel: self.rel,
            pos: lift(&self.pos),
            neg: lift(&self.neg),
            kind: self.kind,
        }
    }

    pub fn summands(&self) -> impl Iterator<Item = &TreeExpr> {
        self.pos.iter().chain(&self.neg)
    }

    pub fn display(&self, names: &Names<'_>) -> String {
        let rel = match self.rel {
            NfRel::Geq => ">=",
            NfRel::Leq => "<=",
        };
        let mut s = format!("{} {rel} {}", names.node(&self.lhs), names.tree_sum(&self.pos));
        for t in &self.neg {
            let c = if t.coeff.is_one() { String::new() } else { format!("{} * ", crate::ext::fmt_rational(&t.coeff)) };
            s.push_str(&format!(" - {c}{}", names.node(&t.node)));
        }
        s
    }
}

/// Kind by the word-length criterion.
pub fn classify(c: &NfConstraint) -> BoundKind {
    let n = c.lhs.level();
    match c.rel {
        NfRel::Geq if c.pos.iter().all(|t| t.node.level() < n) => BoundKind::Lower,
        NfRel::Leq if c.neg.iter().all(|t| t.node.level() < n) && c.pos.iter().all(|t| t.node.level() < n) => {
            BoundKind::Upper
        }
        _ => BoundKind::Undirected,
    }
}

/// An arithmetic variable of the normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithVar {
    Node(Node),
    Lambda(String),
}

impl ArithVar {
    pub fn name(&self, names: &Names<'_>) -> String {
        match self {
            ArithVar::Node(n) => names.root(n),
            ArithVar::Lambda(l) => format!("${l}"),
        }
    }

    pub fn of_atom(a: &ArithAtom) -> ArithVar {
        match a {
            ArithAtom::Root(n) => ArithVar::Node(n.clone()),
            ArithAtom::Lambda(l) => ArithVar::Lambda(l.clone()),
        }
    }
}

/// Cycles among undirected constraints contracted to single classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Collapsed {
    /// Edges `a → b` meaning `a ≥ b` follows from one constraint.
    pub edges: BTreeSet<(Node, Node)>,
    /// Member to representative (its smallest member).
    pub rep: BTreeMap<Node, Node>,
    /// Strongly connected components with more than one member or a self-loop.
    pub cycles: Vec<Vec<Node>>,
    /// `(representative, node)`: `node` is zero unless the class is infinite.
    pub zero_forced: BTreeSet<(Node, Node)>,
    /// Representatives, greater first.
    pub order: Vec<Node>,
    /// Reverse readings `S_j ≤ (1/c_j)·N − Σ_{i≠j} (c_i/c_j)·S_i`.
    pub derived: Vec<NfConstraint>,
}

impl Collapsed {
    pub fn rep_of<'a>(&'a self, n: &'a Node) -> &'a Node {
        self.rep.get(n).unwrap_or(n)
    }
}

#[derive(Clone, Debug)]
pub struct NormalFormSystem {
    pub n: usize,
    pub alphabet: Alphabet,
    pub vars: Vec<String>,
    pub constraints: Vec<NfConstraint>,
    pub arith: Vec<ArithConstraint>,
    pub arith_vars: Vec<ArithVar>,
    pub collapsed: Collapsed,
}

impl NormalFormSystem {
    pub fn names(&self) -> Names<'_> {
        Names { alphabet: &self.alphabet, vars: &self.vars }
    }

    pub fn of_kind(&self, k: BoundKind) -> impl Iterator<Item = &NfConstraint> {
        self.constraints.iter().filter(move |c| c.kind == k)
    }

    /// Constraints and derived readings indexed by their left-hand node.
    pub fn by_lhs(&self) -> BTreeMap<Node, Vec<NfConstraint>> {
        let mut m: BTreeMap<Node, Vec<NfConstraint>> = BTreeMap::new();
        for c in self.constraints.iter().chain(&self.collapsed.derived) {
            m.entry(c.lhs.clone()).or_default().push(c.clone());
        }
        m
    }
}

impl fmt::Display for NormalFormSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names();
        writeln!(f, "# level {}", self.n)?;
        for c in &self.arith {
            writeln!(f, "{}", names.arith_constraint(c))?;
        }
        for c in &self.constraints {
            writeln!(f, "{}    # {:?}", c.display(&names), c.kind)?;
        }
        for c in &self.collapsed.derived {
            writeln!(f, "{}    # derived", c.display(&names))?;
        }
        for (r, z) in &self.collapsed.zero_forced {
            writeln!(f, "# {} = 0 unless {} is infinite", names.node(z), names.node(r))?;
        }
        Ok(())
    }
}

/// Isolates the longest summand of one constraint. Returns the variants and
/// their common level.
fn isolate(c: &TreeConstraint) -> (Vec<NfConstraint>, usize) {
    let m = c.max_len();
    if c.lhs.level() == m {
        let mut nc = NfConstraint {
            lhs: c.lhs.clone(),
            rel: NfRel::Geq,
            pos: c.rhs.clone(),
            neg: vec![],
            kind: BoundKind::Lower,
        };
        nc.kind = classify(&nc);
        return (vec![nc], m);
    }
    let (longest, rest): (Vec<&TreeExpr>, Vec<&TreeExpr>) = c.rhs.iter().partition(|t| t.node.level() == m);
    let mut out = Vec::new();
    for (j, s) in longest.iter().enumerate() {
        let k = &s.coeff;
        let scale = |t: &TreeExpr| TreeExpr { coeff: &t.coeff / k, node: t.node.clone() };
        let neg: Vec<TreeExpr> = longest
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, t)| scale(t))
            .chain(rest.iter().map(|t| scale(t)))
            .collect();
        let mut nc = NfConstraint {
            lhs: s.node.clone(),
            rel: NfRel::Leq,
            pos: vec![TreeExpr { coeff: Rational::one() / k, node: c.lhs.clone() }],
            neg,
            kind: BoundKind::Upper,
        };
        nc.kind = classify(&nc);
        out.push(nc);
    }
    (out, m)
}

/// Builds the level-`n` normal form.
pub fn normalize(sys: &ConstraintSystem) -> NormalFormSystem {
    let isolated: Vec<(Vec<NfConstraint>, usize)> = sys.tree.iter().map(isolate).collect();
    let max_root = sys
        .arith
        .iter()
        .flat_map(|c| c.atoms())
        .filter_map(|a| match a {
            ArithAtom::Root(n) => Some(n.level() + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let n = isolated.iter().map(|(_, m)| *m).max().unwrap_or(0).max(max_root);
    let mut constraints = Vec::new();
    let mut arith = sys.arith.clone();
    for (c, (variants, m)) in sys.tree.iter().zip(&isolated) {
        for p in sys.alphabet.words_of_len(n - m) {
            for v in variants {
                constraints.push(v.under(&p));
            }
        }
        for p in sys.alphabet.words_below(n - m) {
            arith.push(c.under(&p).root());
        }
    }
    let mut arith_vars: Vec<ArithVar> = Vec::new();
    for x in sys.var_ids() {
        for w in sys.alphabet.words_below(n) {
            arith_vars.push(ArithVar::Node(Node::new(w, x)));
        }
    }
    // nodes above level n also arise without labels, e.g. for an empty alphabet
    let mut seen: BTreeSet<ArithVar> = arith_vars.iter().cloned().collect();
    for a in arith.iter().flat_map(|c| c.atoms()) {
        let v = ArithVar::of_atom(a);
        if seen.insert(v.clone()) {
            arith_vars.push(v);
        }
    }
    let collapsed = collapse_cycles(&constraints);
    NormalFormSystem {
        n,
        alphabet: sys.alphabet.clone(),
        vars: sys.vars.clone(),
        constraints,
        arith,
        arith_vars,
        collapsed,
    }
}

/// Contracts cycles among undirected `≥` constraints and records the
/// reverse readings of every same-level summand.
pub fn collapse_cycles(constraints: &[NfConstraint]) -> Collapsed {
    let undirected: Vec<&NfConstraint> =
        constraints.iter().filter(|c| c.kind == BoundKind::Undirected && c.rel == NfRel::Geq).collect();
    let mut out = Collapsed::default();
    let mut nodes: BTreeSet<Node> = BTreeSet::new();
    for c in &undirected {
        let lvl = c.lhs.level();
        nodes.insert(c.lhs.clone());
        for t in c.pos.iter().filter(|t| t.node.level() == lvl) {
            nodes.insert(t.node.clone());
            if t.coeff >= Rational::one() {
                out.edges.insert((c.lhs.clone(), t.node.clone()));
            }
            let cj = &t.coeff;
            out.derived.push(NfConstraint {
                lhs: t.node.clone(),
                rel: NfRel::Leq,
                pos: vec![TreeExpr { coeff: Rational::one() / cj, node: c.lhs.clone() }],
                neg: c
                    .pos
                    .iter()
                    .filter(|s| s.node != t.node)
                    .map(|s| TreeExpr { coeff: &s.coeff / cj, node: s.node.clone() })
                    .collect(),
                kind: BoundKind::Undirected,
            });
        }
    }
    let nodes: Vec<Node> = nodes.into_iter().collect();
    let index: BTreeMap<&Node, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let mut adj = vec![Vec::new(); nodes.len()];
    for (a, b) in &out.edges {
        adj[index[a]].push(index[b]);
    }
    let comps = tarjan(&adj);
    let mut comp_of = vec![0; nodes.len()];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let rep_idx: Vec<usize> = comps.iter().map(|c| *c.iter().min().expect("nonempty")).collect();
    for (ci, comp) in comps.iter().enumerate() {
        let self_loop = comp.len() == 1 && adj[comp[0]].contains(&comp[0]);
        if comp.len() > 1 || self_loop {
            let mut members: Vec<Node> = comp.iter().map(|&v| nodes[v].clone()).collect();
            members.sort();
            out.cycles.push(members);
        }
        for &v in comp {
            out.rep.insert(nodes[v].clone(), nodes[rep_idx[ci]].clone());
        }
    }
    // inside a class every member is equal, so a constraint N ≥ M + R with
    // N, M in the class forces R to zero unless the class is infinite
    for c in &undirected {
        let Some(&ni) = index.get(&c.lhs) else { continue };
        let comp = comp_of[ni];
        let inner = c
            .pos
            .iter()
            .filter(|t| index.get(&t.node).is_some_and(|&i| comp_of[i] == comp) && t.coeff >= Rational::one())
            .min_by(|a, b| a.node.cmp(&b.node));
        let Some(chosen) = inner else { continue };
        let rep = nodes[rep_idx[comp]].clone();
        for t in &c.pos {
            let rest = if t.node == chosen.node { &t.coeff - Rational::one() } else { t.coeff.clone() };
            if !rest.is_zero() {
                out.zero_forced.insert((rep.clone(), t.node.clone()));
            }
        }
    }
    // topological order of the condensation, smallest representative first among ties
    let k = comps.len();
    let mut indeg = vec![0usize; k];
    let mut cadj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for (a, b) in &out.edges {
        let (ca, cb) = (comp_of[index[a]], comp_of[index[b]]);
        if ca != cb && cadj[ca].insert(cb) {
            indeg[cb] += 1;
        }
    }
    let mut ready: BTreeSet<(Node, usize)> =
        (0..k).filter(|&c| indeg[c] == 0).map(|c| (nodes[rep_idx[c]].clone(), c)).collect();
    while let Some((node, c)) = ready.pop_first() {
        out.order.push(node);
        for &d in &cadj[c] {
            indeg[d] -= 1;
            if indeg[d] == 0 {
                ready.insert((nodes[rep_idx[d]].clone(), d));
            }
        }
    }
    out
}

/// Strongly connected components.
fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct St<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        out: Vec<Vec<usize>>,
    }
    fn visit(s: &mut St<'_>, v: usize) {
        s.index[v] = Some(s.next);
        s.low[v] = s.next;
        s.next += 1;
        s.stack.push(v);
        s.on[v] = true;
        for i in 0..s.adj[v].len() {
            let w = s.adj[v][i];
            match s.index[w] {
                None => {
                    visit(s, w);
                    s.low[v] = s.low[v].min(s.low[w]);
                }
                Some(iw) if s.on[w] => s.low[v] = s.low[v].min(iw),
                _ => {}
            }
        }
        if Some(s.low[v]) == s.index[v] {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().expect("stack holds the component");
                s.on[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            s.out.push(comp);
        }
    }
    let n = adj.len();
    let mut s = St { adj, index: vec![None; n], low: vec![0; n], on: vec![false; n], stack: vec![], next: 0, out: vec![] };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}
