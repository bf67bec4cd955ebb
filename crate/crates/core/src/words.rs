//! Combinatorics on label words.

use thiserror::Error;

use crate::model::{Label, LabelWord, TreeConstraint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("constraint is not of self-similar shape")]
    ShapeMismatch,
    #[error("no independence witness up to length {0}")]
    SearchExhausted(usize),
}

/// One word is a suffix of the other.
pub fn suffix_dependent(u: &LabelWord, v: &LabelWord) -> bool {
    u.ends_with(v) || v.ends_with(u)
}

/// `(q, r, i)` with `s = qr`, `u = rq`, `t = q(rq)^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub q: LabelWord,
    pub r: LabelWord,
    pub i: usize,
}

fn power(w: &[Label], n: usize) -> Vec<Label> {
    w.iter().copied().cycle().take(w.len() * n).collect()
}

/// `w = p^k` for some `k ≥ 1`, given nonempty `p`.
fn power_of(w: &[Label], p: &[Label]) -> Option<usize> {
    if p.is_empty() || w.is_empty() || !w.len().is_multiple_of(p.len()) {
        return None;
    }
    let k = w.len() / p.len();
    (power(p, k) == w).then_some(k)
}

/// Shortest `p` with `w ∈ p⁺`.
pub fn primitive_root(w: &LabelWord) -> LabelWord {
    let n = w.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && power_of(&w.0, &w.0[..d]).is_some() {
            return LabelWord(w.0[..d].to_vec());
        }
    }
    LabelWord::empty()
}

/// Solves `tu = st`, returning the decomposition with the shortest `q`.
pub fn conjugacy_decompose(s: &LabelWord, t: &LabelWord, u: &LabelWord) -> Result<Decomposition, WordError> {
    if s.is_empty() || t.is_empty() || u.is_empty() {
        return Err(WordError::PreconditionViolated("words must be nonempty".into()));
    }
    if t.concat(u) != s.concat(t) {
        return Err(WordError::PreconditionViolated("tu ≠ st".into()));
    }
    for k in 0..=s.len() {
        let (q, r) = (&s.0[..k], &s.0[k..]);
        let rq: Vec<Label> = r.iter().chain(q).copied().collect();
        if rq != u.0 || !t.0.starts_with(q) {
            continue;
        }
        let rest = &t.0[k..];
        let i = if rest.is_empty() { Some(0) } else { power_of(rest, &rq) };
        if let Some(i) = i {
            return Ok(Decomposition { q: LabelWord(q.to_vec()), r: LabelWord(r.to_vec()), i });
        }
    }
    Err(WordError::PreconditionViolated("no decomposition".into()))
}

/// For `x^n y^m = z^k` with exponents at least 2, a word `t` with `x, y, z ∈ t*`.
pub fn common_root(
    x: &LabelWord,
    y: &LabelWord,
    z: &LabelWord,
    n: usize,
    m: usize,
    k: usize,
) -> Result<LabelWord, WordError> {
    if n < 2 || m < 2 || k < 2 {
        return Err(WordError::PreconditionViolated("exponents must be at least 2".into()));
    }
    let lhs: Vec<Label> = power(&x.0, n).into_iter().chain(power(&y.0, m)).collect();
    if lhs != power(&z.0, k) {
        return Err(WordError::PreconditionViolated("x^n y^m ≠ z^k".into()));
    }
    let t = primitive_root(z);
    let generated = |w: &LabelWord| w.is_empty() || power_of(&w.0, &t.0).is_some();
    if generated(x) && generated(y) {
        Ok(t)
    } else {
        Err(WordError::PreconditionViolated("no common root".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelfSimilar {
    /// Every segment of the greater side is a power of this word.
    CommonRoot(LabelWord),
    /// Under this prefix no summand is a suffix of the greater side or vice versa.
    IndependentAfter(LabelWord),
}

/// Analyzes `a₁…aₙ x ≥ Σ cᵢ·(aᵢ₊₁…aₙ) x`.
pub fn analyze_self_similar(c: &TreeConstraint) -> Result<SelfSimilar, WordError> {
    let w = &c.lhs.word;
    if c.rhs.is_empty() || c.rhs.iter().any(|t| t.node.var != c.lhs.var || !w.ends_with(&t.node.word) || t.node.word.len() >= w.len()) {
        return Err(WordError::ShapeMismatch);
    }
    let mut cuts: Vec<usize> = c.rhs.iter().map(|t| w.len() - t.node.word.len()).collect();
    cuts.extend([0, w.len()]);
    cuts.sort_unstable();
    cuts.dedup();
    let root = primitive_root(w);
    if cuts.windows(2).all(|p| power_of(&w.0[p[0]..p[1]], &root.0).is_some()) {
        return Ok(SelfSimilar::CommonRoot(root));
    }
    let mut labels: Vec<Label> = w.0.clone();
    labels.sort();
    labels.dedup();
    let limit = 2 * w.len();
    let mut layer = vec![LabelWord::empty()];
    for _ in 0..limit {
        let mut next = Vec::new();
        for t in &layer {
            for &l in &labels {
                let mut v = t.0.clone();
                v.push(l);
                next.push(LabelWord(v));
            }
        }
        for t in &next {
            let tw = t.concat(w);
            if c.rhs.iter().all(|s| !suffix_dependent(&t.concat(&s.node.word), &tw)) {
                return Ok(SelfSimilar::IndependentAfter(t.clone()));
            }
        }
        layer = next;
    }
    Err(WordError::SearchExhausted(limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_system;
    use proptest::prelude::*;

    fn w(s: &str) -> LabelWord {
        LabelWord(s.bytes().map(|b| Label((b - b'a') as u32)).collect())
    }

    #[test]
    fn suffixes() {
        assert!(suffix_dependent(&w("b"), &w("ab")));
        assert!(!suffix_dependent(&w("ab"), &w("ba")));
        assert!(suffix_dependent(&LabelWord::empty(), &w("abba")));
    }

    #[test]
    fn small_conjugacies() {
        let d = conjugacy_decompose(&w("ab"), &w("a"), &w("ba")).unwrap();
        assert_eq!(d, Decomposition { q: w("a"), r: w("b"), i: 0 });
        let d = conjugacy_decompose(&w("aa"), &w("aa"), &w("aa")).unwrap();
        assert_eq!(d, Decomposition { q: LabelWord::empty(), r: w("aa"), i: 1 });
        assert!(conjugacy_decompose(&w("ab"), &w("b"), &w("ba")).is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(common_root(&w("a"), &w("a"), &w("aa"), 2, 2, 2), Ok(w("a")));
        // (ab)²(abab)² = (abab)³ does hold
        assert_eq!(common_root(&w("ab"), &w("abab"), &w("abab"), 2, 2, 3), Ok(w("ab")));
        assert!(common_root(&w("ab"), &w("abab"), &w("abab"), 2, 2, 2).is_err());
    }

    #[test]
    fn self_similar_shapes() {
        let sys = parse_system("l r l r x >= l r x + l r x\nl x >= x\nl r x >= r x\nl x >= y").unwrap();
        let lr = sys.alphabet.parse_word("l r").unwrap();
        let l = sys.alphabet.parse_word("l").unwrap();
        assert_eq!(analyze_self_similar(&sys.tree[0]), Ok(SelfSimilar::CommonRoot(lr)));
        assert_eq!(analyze_self_similar(&sys.tree[1]), Ok(SelfSimilar::CommonRoot(l)));
        let c = &sys.tree[2];
        match analyze_self_similar(c).unwrap() {
            SelfSimilar::IndependentAfter(t) => {
                assert!(!suffix_dependent(&t.concat(&c.rhs[0].node.word), &t.concat(&c.lhs.word)))
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(analyze_self_similar(&sys.tree[3]), Err(WordError::ShapeMismatch));
    }

    fn arb_word(max: usize) -> impl Strategy<Value = LabelWord> {
        prop::collection::vec(0u32..2, 0..=max).prop_map(|v| LabelWord(v.into_iter().map(Label).collect()))
    }

    proptest! {
        #[test]
        fn decomposition_recomposes(q in arb_word(3), r in arb_word(3), i in 0usize..=3) {
            let s = q.concat(&r);
            let u = r.concat(&q);
            let mut t = q.clone();
            for _ in 0..i { t = t.concat(&u); }
            prop_assume!(!s.is_empty() && !t.is_empty());
            let d = conjugacy_decompose(&s, &t, &u).unwrap();
            prop_assert_eq!(d.q.concat(&d.r), s);
            prop_assert_eq!(d.r.concat(&d.q), u.clone());
            let mut t2 = d.q.clone();
            for _ in 0..d.i { t2 = t2.concat(&u); }
            prop_assert_eq!(t2, t);
        }

        #[test]
        fn root_generates_powers(t in arb_word(3), a in 1usize..=3, b in 1usize..=3, c in 1usize..=3, n in 2usize..=3, m in 2usize..=3) {
            prop_assume!(!t.is_empty());
            let pw = |k: usize| LabelWord(power(&t.0, k));
            let (x, y) = (pw(a), pw(b));
            let total = a * n + b * m;
            prop_assume!(total % c == 0 && total / c >= 2);
            let z = pw(c);
            let k = total / c;
            let root = common_root(&x, &y, &z, n, m, k).unwrap();
            for v in [&x, &y, &z] {
                prop_assert!(power_of(&v.0, &root.0).is_some());
            }
        }
    }
}
