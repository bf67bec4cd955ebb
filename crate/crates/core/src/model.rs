//! Constraint systems over infinite labeled trees.
//!
//! Label words are written outermost-first: the word `u = u1 u2 … uk` applied
//! to a variable `x` denotes the term `u1(u2(…uk(x)…))`. The root of that term
//! is the node of `x` reached by following the labels `uk, …, u1` from the
//! root of `x`. Every module uses this orientation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::ext::{fmt_rational, Rational};

/// Index of a label in an [`Alphabet`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(pub u32);

/// Index of a tree variable in a system's variable table.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// Finite ordered set of label names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut a = Alphabet::default();
        for n in names {
            a.intern(&n.into());
        }
        a
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<Label> {
        self.names.iter().position(|n| n == name).map(|i| Label(i as u32))
    }

    pub(crate) fn intern(&mut self, name: &str) -> Label {
        match self.lookup(name) {
            Some(l) => l,
            None => {
                self.names.push(name.to_string());
                Label(self.names.len() as u32 - 1)
            }
        }
    }

    pub fn name(&self, l: Label) -> &str {
        &self.names[l.0 as usize]
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.names.len() as u32).map(Label)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// All words of exactly length `n`, in lexicographic label order.
    pub fn words_of_len(&self, n: usize) -> Vec<LabelWord> {
        let mut out = vec![LabelWord::empty()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * self.len());
            for w in &out {
                for l in self.labels() {
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(LabelWord(v));
                }
            }
            out = next;
        }
        out
    }

    /// All words of length `< n`.
    pub fn words_below(&self, n: usize) -> Vec<LabelWord> {
        (0..n).flat_map(|k| self.words_of_len(k)).collect()
    }

    /// Parses a space-separated word such as `"l r"`; `""` and `"ε"` give the empty word.
    pub fn parse_word(&self, s: &str) -> Option<LabelWord> {
        let mut v = Vec::new();
        for t in s.split_whitespace() {
            if t == "ε" {
                continue;
            }
            v.push(self.lookup(t)?);
        }
        Some(LabelWord(v))
    }
}

/// A label word, outermost label first.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelWord(pub Vec<Label>);

impl LabelWord {
    pub fn empty() -> Self {
        LabelWord(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` applied outside `inner`: the word `self · inner`.
    pub fn concat(&self, inner: &LabelWord) -> LabelWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&inner.0);
        LabelWord(v)
    }

    pub fn prepend(&self, l: Label) -> LabelWord {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(l);
        v.extend_from_slice(&self.0);
        LabelWord(v)
    }

    pub fn ends_with(&self, suffix: &LabelWord) -> bool {
        self.0.ends_with(&suffix.0)
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay { word: self, alphabet }
    }
}

pub struct WordDisplay<'a> {
    word: &'a LabelWord,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("ε");
        }
        for (i, l) in self.word.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(self.alphabet.name(*l))?;
        }
        Ok(())
    }
}

/// A node expression `u x`: the subtree of `x` addressed by `u`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node {
    pub word: LabelWord,
    pub var: VarId,
}

impl Node {
    pub fn new(word: LabelWord, var: VarId) -> Self {
        Node { word, var }
    }

    pub fn var(var: VarId) -> Self {
        Node { word: LabelWord::empty(), var }
    }

    pub fn level(&self) -> usize {
        self.word.len()
    }

    /// Applies `prefix` outside this node's word.
    pub fn under(&self, prefix: &LabelWord) -> Node {
        Node { word: prefix.concat(&self.word), var: self.var }
    }
}

/// A positively weighted tree term `c · u x`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeExpr {
    pub coeff: Rational,
    pub node: Node,
}

impl TreeExpr {
    pub fn unit(node: Node) -> Self {
        TreeExpr { coeff: Rational::one(), node }
    }
}

/// A unilateral tree constraint `lhs ≥ Σ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeConstraint {
    pub lhs: Node,
    pub rhs: Vec<TreeExpr>,
}

impl TreeConstraint {
    pub fn under(&self, prefix: &LabelWord) -> TreeConstraint {
        TreeConstraint {
            lhs: self.lhs.under(prefix),
            rhs: self
                .rhs
                .iter()
                .map(|t| TreeExpr { coeff: t.coeff.clone(), node: t.node.under(prefix) })
                .collect(),
        }
    }

    /// Longest word length among all summands.
    pub fn max_len(&self) -> usize {
        self.rhs.iter().map(|t| t.node.level()).chain([self.lhs.level()]).max().unwrap_or(0)
    }

    /// The root projection `◇(lhs) ≥ Σ c·◇(rhs)`.
    pub fn root(&self) -> ArithConstraint {
        let mut lhs = ArithSide::default();
        lhs.add_atom(ArithAtom::Root(self.lhs.clone()), Rational::one());
        let mut rhs = ArithSide::default();
        for t in &self.rhs {
            rhs.add_atom(ArithAtom::Root(t.node.clone()), t.coeff.clone());
        }
        ArithConstraint { lhs, rel: Rel::Ge, rhs }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Ge,
    Le,
    Eq,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Ge => ">=",
            Rel::Le => "<=",
            Rel::Eq => "=",
        }
    }
}

/// A tree relation with arbitrary summands on both sides. Only the solution
/// checker accepts these; the solver works with [`TreeConstraint`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeRelation {
    pub lhs: Vec<TreeExpr>,
    pub rel: Rel,
    pub rhs: Vec<TreeExpr>,
}

impl From<&TreeConstraint> for TreeRelation {
    fn from(c: &TreeConstraint) -> Self {
        TreeRelation { lhs: vec![TreeExpr::unit(c.lhs.clone())], rel: Rel::Ge, rhs: c.rhs.clone() }
    }
}

/// An atom of an arithmetic constraint.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithAtom {
    /// A free arithmetic variable, written `$name`.
    Lambda(String),
    /// The root value `◇(u x)`, written `@(u x)`.
    Root(Node),
}

/// A nonnegative combination of atoms plus a nonnegative constant.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArithSide {
    pub terms: BTreeMap<ArithAtom, Rational>,
    pub constant: Rational,
}

impl ArithSide {
    pub fn constant(c: Rational) -> Self {
        ArithSide { terms: BTreeMap::new(), constant: c }
    }

    pub fn add_atom(&mut self, atom: ArithAtom, c: Rational) {
        if c.is_zero() {
            return;
        }
        *self.terms.entry(atom).or_insert_with(Rational::zero) += c;
    }

    pub fn atoms(&self) -> impl Iterator<Item = &ArithAtom> {
        self.terms.keys()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArithConstraint {
    pub lhs: ArithSide,
    pub rel: Rel,
    pub rhs: ArithSide,
}

impl ArithConstraint {
    pub fn atoms(&self) -> impl Iterator<Item = &ArithAtom> {
        self.lhs.atoms().chain(self.rhs.atoms())
    }
}

/// A parsed system that may still contain bilateral tree relations.
#[derive(Clone, Debug, Default)]
pub struct RawSystem {
    pub alphabet: Alphabet,
    pub vars: Vec<String>,
    pub relations: Vec<TreeRelation>,
    pub arith: Vec<ArithConstraint>,
}

/// A system of unilateral tree constraints plus arithmetic root constraints.
#[derive(Clone, Debug, Default)]
pub struct ConstraintSystem {
    pub alphabet: Alphabet,
    pub vars: Vec<String>,
    pub tree: Vec<TreeConstraint>,
    pub arith: Vec<ArithConstraint>,
}

impl ConstraintSystem {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v == name).map(|i| VarId(i as u32))
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0 as usize]
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len() as u32).map(VarId)
    }

    pub fn lambdas(&self) -> BTreeSet<String> {
        self.arith
            .iter()
            .flat_map(|c| c.atoms())
            .filter_map(|a| match a {
                ArithAtom::Lambda(n) => Some(n.clone()),
                _ => None,
            })
            .collect()
    }

    /// All relations, for the pointwise checker.
    pub fn relations(&self) -> Vec<TreeRelation> {
        self.tree.iter().map(TreeRelation::from).collect()
    }

    pub fn names(&self) -> Names<'_> {
        Names { alphabet: &self.alphabet, vars: &self.vars }
    }

    /// Parses a node written like `l r x`.
    pub fn parse_node(&self, s: &str) -> Option<Node> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let (var, labels) = toks.split_last()?;
        let word = self.alphabet.parse_word(&labels.join(" "))?;
        Some(Node::new(word, self.var_id(var)?))
    }
}

/// Name tables used to render nodes and atoms.
#[derive(Copy, Clone)]
pub struct Names<'a> {
    pub alphabet: &'a Alphabet,
    pub vars: &'a [String],
}

impl Names<'_> {
    pub fn node(&self, n: &Node) -> String {
        let mut s = String::new();
        for l in &n.word.0 {
            s.push_str(self.alphabet.name(*l));
            s.push(' ');
        }
        s.push_str(&self.vars[n.var.0 as usize]);
        s
    }

    pub fn root(&self, n: &Node) -> String {
        format!("@({})", self.node(n))
    }

    pub fn atom(&self, a: &ArithAtom) -> String {
        match a {
            ArithAtom::Lambda(n) => format!("${n}"),
            ArithAtom::Root(n) => self.root(n),
        }
    }

    pub fn word(&self, w: &LabelWord) -> String {
        w.0.iter().map(|l| self.alphabet.name(*l)).collect::<Vec<_>>().join(" ")
    }

    fn coeff_prefix(c: &Rational) -> String {
        if c.is_one() {
            String::new()
        } else {
            format!("{} * ", fmt_rational(c))
        }
    }

    pub fn tree_sum(&self, terms: &[TreeExpr]) -> String {
        terms
            .iter()
            .map(|t| format!("{}{}", Self::coeff_prefix(&t.coeff), self.node(&t.node)))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn arith_side(&self, s: &ArithSide) -> String {
        let mut parts: Vec<String> = s
            .terms
            .iter()
            .map(|(a, c)| format!("{}{}", Self::coeff_prefix(c), self.atom(a)))
            .collect();
        if !s.constant.is_zero() || parts.is_empty() {
            parts.push(fmt_rational(&s.constant));
        }
        parts.join(" + ")
    }

    pub fn tree_constraint(&self, c: &TreeConstraint) -> String {
        format!("{} >= {}", self.node(&c.lhs), self.tree_sum(&c.rhs))
    }

    pub fn arith_constraint(&self, c: &ArithConstraint) -> String {
        format!("{} {} {}", self.arith_side(&c.lhs), c.rel.symbol(), self.arith_side(&c.rhs))
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.names();
        if !self.alphabet.is_empty() {
            writeln!(f, "labels: {}", self.alphabet.names().join(" "))?;
        }
        for c in &self.arith {
            writeln!(f, "{}", names.arith_constraint(c))?;
        }
        for c in &self.tree {
            writeln!(f, "{}", names.tree_constraint(c))?;
        }
        Ok(())
    }
}
