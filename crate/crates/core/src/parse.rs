//! Text format for constraint systems.
//!
//! ```text
//! labels: l r            # optional; inferred from use otherwise
//! @(x) = 1 ; $k >= 2     # arithmetic: root atoms, $-variables, naturals
//! l x >= x + 2 y         # tree: the greater side is a single atom
//! ```
//!
//! Statements are separated by newlines or `;`, and `#` starts a comment. A
//! tree atom is a run of identifiers, labels outermost-first, ending with the
//! variable. A term is `[nat ["*"]] atom` or a bare `nat`. Arithmetic
//! statements may use `-`; subtracted terms move to the other side.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::ext::Rational;
use crate::model::{
    Alphabet, ArithAtom, ArithConstraint, ArithSide, ConstraintSystem, LabelWord, Node, RawSystem,
    Rel, TreeConstraint, TreeExpr, TreeRelation, VarId,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: `{text}` is not unilateral (greater side must be a single atom with coefficient 1)")]
    NonUnilateral { line: usize, text: String },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: negative constant")]
    NegativeConstant { line: usize },
    #[error("line {line}: relation mixes tree atoms with root atoms or numbers")]
    MixedAtom { line: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Lambda(String),
    Nat(num_bigint::BigInt),
    At,
    LParen,
    RParen,
    Star,
    Plus,
    Minus,
    Rel(Rel),
}

fn tokenize(s: &str, line: usize) -> Result<Vec<Tok>, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let syntax = |msg: String| ParseError::Syntax { line, msg };
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '@' => {
                out.push(Tok::At);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '≥' => {
                out.push(Tok::Rel(Rel::Ge));
                i += 1
            }
            '≤' => {
                out.push(Tok::Rel(Rel::Le));
                i += 1
            }
            '=' => {
                out.push(Tok::Rel(Rel::Eq));
                i += 1
            }
            '>' | '<' => {
                if chars.get(i + 1) != Some(&'=') {
                    return Err(syntax(format!("expected `{c}=`")));
                }
                out.push(Tok::Rel(if c == '>' { Rel::Ge } else { Rel::Le }));
                i += 2
            }
            '$' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                if j == start {
                    return Err(syntax("expected a name after `$`".into()));
                }
                out.push(Tok::Lambda(chars[start..j].iter().collect()));
                i = j
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                out.push(Tok::Nat(s.parse().expect("digits")));
                i = j
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                out.push(Tok::Ident(chars[i..j].iter().collect()));
                i = j
            }
            _ => return Err(syntax(format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

#[derive(Debug, Clone)]
enum Atom {
    Tree(Vec<String>),
    Root(Vec<String>),
    Lambda(String),
}

#[derive(Debug, Clone)]
struct Term {
    coeff: num_bigint::BigInt,
    atom: Option<Atom>,
    negated: bool,
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, msg: msg.into() }
    }

    fn idents(&mut self) -> Vec<String> {
        let mut v = Vec::new();
        while let Some(Tok::Ident(s)) = self.peek() {
            v.push(s.clone());
            self.pos += 1;
        }
        v
    }

    fn atom(&mut self) -> Result<Option<Atom>, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => Ok(Some(Atom::Tree(self.idents()))),
            Some(Tok::Lambda(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(Some(Atom::Lambda(s)))
            }
            Some(Tok::At) => {
                self.pos += 1;
                if self.peek() != Some(&Tok::LParen) {
                    return Err(self.err("expected `(` after `@`"));
                }
                self.pos += 1;
                let ids = self.idents();
                if ids.is_empty() {
                    return Err(self.err("empty root atom"));
                }
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(Some(Atom::Root(ids)))
            }
            _ => Ok(None),
        }
    }

    fn term(&mut self, negated: bool) -> Result<Term, ParseError> {
        if let Some(Tok::Nat(n)) = self.peek() {
            let n = n.clone();
            self.pos += 1;
            let starred = if self.peek() == Some(&Tok::Star) {
                self.pos += 1;
                true
            } else {
                false
            };
            let atom = self.atom()?;
            if starred && atom.is_none() {
                return Err(self.err("expected an atom after `*`"));
            }
            return Ok(Term { coeff: n, atom, negated });
        }
        match self.atom()? {
            Some(a) => Ok(Term { coeff: 1.into(), atom: Some(a), negated }),
            None => Err(self.err("expected a term")),
        }
    }

    fn side(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut terms = Vec::new();
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            if matches!(self.peek(), Some(Tok::Nat(_))) {
                return Err(ParseError::NegativeConstant { line: self.line });
            }
            terms.push(self.term(true)?);
        } else {
            terms.push(self.term(false)?);
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    terms.push(self.term(false)?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    terms.push(self.term(true)?);
                }
                _ => return Ok(terms),
            }
        }
    }
}

struct Builder {
    alphabet: Alphabet,
    declared: bool,
    vars: Vec<String>,
}

impl Builder {
    fn node(&mut self, ids: &[String], line: usize) -> Result<Node, ParseError> {
        let (var, labels) = ids.split_last().expect("nonempty atom");
        let mut word = Vec::with_capacity(labels.len());
        for l in labels {
            let label = if self.declared {
                self.alphabet
                    .lookup(l)
                    .ok_or_else(|| ParseError::UnknownLabel { line, label: l.clone() })?
            } else {
                self.alphabet.intern(l)
            };
            word.push(label);
        }
        let v = match self.vars.iter().position(|x| x == var) {
            Some(i) => i,
            None => {
                self.vars.push(var.clone());
                self.vars.len() - 1
            }
        };
        Ok(Node::new(LabelWord(word), VarId(v as u32)))
    }
}

fn split_statements(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().flat_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        l.split(';').map(move |s| (i + 1, s.trim())).filter(|(_, s)| !s.is_empty())
    })
}

/// Parses text into a system whose tree relations may be bilateral.
pub fn parse_relations(text: &str) -> Result<RawSystem, ParseError> {
    let mut b = Builder { alphabet: Alphabet::default(), declared: false, vars: Vec::new() };
    let mut relations = Vec::new();
    let mut arith = Vec::new();
    for (line, stmt) in split_statements(text) {
        if let Some(rest) = stmt.strip_prefix("labels:") {
            for name in rest.split_whitespace() {
                b.alphabet.intern(name);
            }
            b.declared = true;
            continue;
        }
        let toks = tokenize(stmt, line)?;
        let mut cur = Cursor { toks: &toks, pos: 0, line };
        let lhs = cur.side()?;
        let rel = match cur.peek() {
            Some(Tok::Rel(r)) => *r,
            _ => return Err(cur.err("expected `>=`, `<=` or `=`")),
        };
        cur.pos += 1;
        let rhs = cur.side()?;
        if cur.pos != toks.len() {
            return Err(cur.err("trailing input"));
        }
        let is_tree = lhs.iter().chain(&rhs).any(|t| matches!(t.atom, Some(Atom::Tree(_))));
        if is_tree {
            relations.push(tree_relation(&mut b, &lhs, rel, &rhs, stmt, line)?);
        } else {
            arith.push(arith_constraint(&mut b, &lhs, rel, &rhs, line)?);
        }
    }
    Ok(RawSystem { alphabet: b.alphabet, vars: b.vars, relations, arith })
}

fn tree_relation(
    b: &mut Builder,
    lhs: &[Term],
    rel: Rel,
    rhs: &[Term],
    text: &str,
    line: usize,
) -> Result<TreeRelation, ParseError> {
    let mut convert = |side: &[Term]| -> Result<Vec<TreeExpr>, ParseError> {
        let mut out: Vec<TreeExpr> = Vec::new();
        for t in side {
            if t.negated {
                return Err(ParseError::NonUnilateral { line, text: text.to_string() });
            }
            let ids = match &t.atom {
                Some(Atom::Tree(ids)) => ids,
                _ => return Err(ParseError::MixedAtom { line }),
            };
            if t.coeff.is_zero() {
                continue;
            }
            let node = b.node(ids, line)?;
            let coeff = Rational::from_integer(t.coeff.clone());
            match out.iter_mut().find(|e| e.node == node) {
                Some(e) => e.coeff += coeff,
                None => out.push(TreeExpr { coeff, node }),
            }
        }
        Ok(out)
    };
    let lhs = convert(lhs)?;
    let rhs = convert(rhs)?;
    Ok(TreeRelation { lhs, rel, rhs })
}

fn arith_constraint(
    b: &mut Builder,
    lhs: &[Term],
    rel: Rel,
    rhs: &[Term],
    line: usize,
) -> Result<ArithConstraint, ParseError> {
    let mut sides = [ArithSide::default(), ArithSide::default()];
    for (idx, side) in [lhs, rhs].into_iter().enumerate() {
        for t in side {
            // subtracted terms move to the opposite side
            let target = if t.negated { 1 - idx } else { idx };
            let c = Rational::from_integer(t.coeff.clone());
            match &t.atom {
                None => sides[target].constant += c,
                Some(Atom::Lambda(n)) => sides[target].add_atom(ArithAtom::Lambda(n.clone()), c),
                Some(Atom::Root(ids)) => {
                    let node = b.node(ids, line)?;
                    sides[target].add_atom(ArithAtom::Root(node), c)
                }
                Some(Atom::Tree(_)) => unreachable!("tree atoms handled separately"),
            }
        }
    }
    let [l, r] = sides;
    Ok(ArithConstraint { lhs: l, rel, rhs: r })
}

/// Orients a relation into unilateral constraints, or explains why it cannot be.
pub fn unilateral(rel: &TreeRelation) -> Option<Vec<TreeConstraint>> {
    let single = |side: &[TreeExpr]| -> Option<Node> {
        match side {
            [t] if t.coeff.is_one() => Some(t.node.clone()),
            _ => None,
        }
    };
    let ge = |g: &[TreeExpr], l: &[TreeExpr]| -> Option<TreeConstraint> {
        if l.is_empty() {
            return None;
        }
        Some(TreeConstraint { lhs: single(g)?, rhs: l.to_vec() })
    };
    match rel.rel {
        Rel::Ge => Some(vec![ge(&rel.lhs, &rel.rhs)?]),
        Rel::Le => Some(vec![ge(&rel.rhs, &rel.lhs)?]),
        Rel::Eq => Some(vec![ge(&rel.lhs, &rel.rhs)?, ge(&rel.rhs, &rel.lhs)?]),
    }
}

/// Parses a system and checks that every tree relation is unilateral.
pub fn parse_system(text: &str) -> Result<ConstraintSystem, ParseError> {
    let raw = parse_relations(text)?;
    let mut tree = Vec::new();
    // line numbers are not kept on relations; recover them for error messages
    let tree_lines: Vec<(usize, &str)> = split_statements(text)
        .filter(|(_, s)| !s.starts_with("labels:"))
        .filter(|(l, s)| {
            tokenize(s, *l)
                .map(|t| {
                    let mut prev_at = false;
                    let mut depth = 0;
                    t.iter().any(|tok| {
                        let bare = matches!(tok, Tok::Ident(_)) && depth == 0 && !prev_at;
                        match tok {
                            Tok::LParen => depth += 1,
                            Tok::RParen => depth -= 1,
                            _ => {}
                        }
                        prev_at = matches!(tok, Tok::At);
                        bare
                    })
                })
                .unwrap_or(false)
        })
        .collect();
    for (i, rel) in raw.relations.iter().enumerate() {
        let (line, text) = tree_lines.get(i).copied().unwrap_or((0, ""));
        match unilateral(rel) {
            Some(cs) => tree.extend(cs),
            None => return Err(ParseError::NonUnilateral { line, text: text.to_string() }),
        }
    }
    Ok(ConstraintSystem { alphabet: raw.alphabet, vars: raw.vars, tree, arith: raw.arith })
}
