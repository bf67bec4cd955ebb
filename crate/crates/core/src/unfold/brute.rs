//! Breadth-first derivation search, independent of the automata.

use std::collections::{HashSet, VecDeque};

use num_traits::One;
use thiserror::Error;

use crate::model::{LabelWord, Node, TreeConstraint};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Error)]
#[error("search space truncated before the query was decided")]
pub struct BudgetExceeded;

const MAX_VISITED: usize = 200_000;

/// Searches for a derivation of `greater ≥ lesser` using reflexivity,
/// label application and transitivity, over expressions whose words are at
/// most `max_len` long.
///
/// `Ok(true)` is always exact. `Ok(false)` means no derivation exists within
/// the bound and nothing was truncated.
pub fn brute_entails(
    tree: &[TreeConstraint],
    greater: &Node,
    lesser: &Node,
    max_len: usize,
) -> Result<bool, BudgetExceeded> {
    let mut seen: HashSet<Node> = HashSet::from([greater.clone()]);
    let mut queue = VecDeque::from([greater.clone()]);
    let mut truncated = false;
    while let Some(e) = queue.pop_front() {
        if &e == lesser {
            return Ok(true);
        }
        for n in successors(tree, &e) {
            if n.word.len() > max_len || (!seen.contains(&n) && seen.len() >= MAX_VISITED) {
                truncated = true;
            } else if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    if truncated {
        Err(BudgetExceeded)
    } else {
        Ok(false)
    }
}

/// Every expression derivably below `greater` within the bound, and whether
/// the search was truncated.
pub fn brute_closure(tree: &[TreeConstraint], greater: &Node, max_len: usize) -> (HashSet<Node>, bool) {
    let mut seen: HashSet<Node> = HashSet::from([greater.clone()]);
    let mut queue = VecDeque::from([greater.clone()]);
    let mut truncated = false;
    while let Some(e) = queue.pop_front() {
        for n in successors(tree, &e) {
            if n.word.len() > max_len || (!seen.contains(&n) && seen.len() >= MAX_VISITED) {
                truncated = true;
            } else if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    (seen, truncated)
}

fn successors<'a>(tree: &'a [TreeConstraint], e: &'a Node) -> impl Iterator<Item = Node> + 'a {
    tree.iter()
        .filter(move |c| c.lhs.var == e.var && e.word.ends_with(&c.lhs.word))
        .flat_map(move |c| {
            let p = LabelWord(e.word.0[..e.word.len() - c.lhs.word.len()].to_vec());
            // summands below one do not bound the greater side on their own
            c.rhs
                .iter()
                .filter(|t| t.coeff >= num_rational::BigRational::one())
                .map(move |t| t.node.under(&p))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_system;

    #[test]
    fn chain() {
        let sys = parse_system("l x >= x\nx >= r z\nl r z >= l l y\nl y >= y").unwrap();
        let lx = sys.parse_node("l x").unwrap();
        let x = sys.parse_node("x").unwrap();
        let y = sys.parse_node("y").unwrap();
        assert_eq!(brute_entails(&sys.tree, &lx, &y, 6), Ok(true));
        assert_eq!(brute_entails(&sys.tree, &x, &x, 6), Ok(true));
        assert!(brute_entails(&sys.tree, &x, &y, 6) != Ok(true));
    }
}
