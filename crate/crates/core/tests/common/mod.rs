#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use utc_core::model::{Alphabet, Label, LabelWord};
use utc_core::reach::Nfa;

/// Thompson construction for regexes over single-character label names,
/// with `|`, `*`, `+`, `?` and parentheses. The empty regex denotes `{ε}`.
pub fn regex(alphabet: &Alphabet, re: &str) -> Nfa {
    let chars: Vec<char> = re.chars().filter(|c| !c.is_whitespace()).collect();
    let mut nfa = Nfa::new(alphabet.len());
    let mut pos = 0;
    let (s, t) = alt(alphabet, &chars, &mut pos, &mut nfa);
    assert_eq!(pos, chars.len(), "trailing regex input in {re}");
    nfa.start.insert(s);
    nfa.accept[t] = true;
    nfa
}

fn alt(a: &Alphabet, c: &[char], pos: &mut usize, n: &mut Nfa) -> (usize, usize) {
    let mut branches = vec![seq(a, c, pos, n)];
    while c.get(*pos) == Some(&'|') {
        *pos += 1;
        branches.push(seq(a, c, pos, n));
    }
    if branches.len() == 1 {
        return branches[0];
    }
    let (s, t) = (n.add_state(false), n.add_state(false));
    for (bs, bt) in branches {
        n.add_eps(s, bs);
        n.add_eps(bt, t);
    }
    (s, t)
}

fn seq(a: &Alphabet, c: &[char], pos: &mut usize, n: &mut Nfa) -> (usize, usize) {
    let s = n.add_state(false);
    let mut cur = s;
    while let Some(&ch) = c.get(*pos) {
        if ch == '|' || ch == ')' {
            break;
        }
        let (fs, ft) = if ch == '(' {
            *pos += 1;
            let r = alt(a, c, pos, n);
            assert_eq!(c.get(*pos), Some(&')'));
            *pos += 1;
            r
        } else {
            *pos += 1;
            let l = a.lookup(&ch.to_string()).unwrap_or_else(|| panic!("unknown label {ch}"));
            let (x, y) = (n.add_state(false), n.add_state(false));
            n.add_edge(x, l, y);
            (x, y)
        };
        let (fs, ft) = match c.get(*pos) {
            Some('*') => {
                *pos += 1;
                let (x, y) = (n.add_state(false), n.add_state(false));
                n.add_eps(x, fs);
                n.add_eps(ft, y);
                n.add_eps(x, y);
                n.add_eps(ft, fs);
                (x, y)
            }
            Some('+') => {
                *pos += 1;
                n.add_eps(ft, fs);
                (fs, ft)
            }
            Some('?') => {
                *pos += 1;
                n.add_eps(fs, ft);
                (fs, ft)
            }
            _ => (fs, ft),
        };
        n.add_eps(cur, fs);
        cur = ft;
    }
    (s, cur)
}

pub fn word(alphabet: &Alphabet, s: &str) -> Vec<Label> {
    s.chars().map(|c| alphabet.lookup(&c.to_string()).unwrap()).collect()
}

pub fn show(alphabet: &Alphabet, w: &[Label]) -> String {
    w.iter().map(|l| alphabet.name(*l)).collect::<Vec<_>>().join("")
}

fn random_word(rng: &mut StdRng, labels: &[&str], max: usize) -> String {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| labels[rng.gen_range(0..labels.len())]).collect::<Vec<_>>().join(" ")
}

fn atom(rng: &mut StdRng, labels: &[&str], vars: &[&str], max: usize) -> String {
    let w = random_word(rng, labels, max);
    let v = vars[rng.gen_range(0..vars.len())];
    if w.is_empty() {
        v.to_string()
    } else {
        format!("{w} {v}")
    }
}

/// A random unilateral system over labels `l r` as source text.
pub fn random_tree_system(rng: &mut StdRng, n_vars: usize, n_cons: usize, max_word: usize) -> String {
    let labels = ["l", "r"];
    let vars: Vec<&str> = ["x", "y", "z", "w"][..n_vars].to_vec();
    let mut text = String::from("labels: l r\n");
    for _ in 0..n_cons {
        let lhs = atom(rng, &labels, &vars, max_word);
        let k = rng.gen_range(1..=2);
        let rhs: Vec<String> = (0..k)
            .map(|_| {
                let a = atom(rng, &labels, &vars, max_word);
                if rng.gen_bool(0.2) {
                    format!("2 {a}")
                } else {
                    a
                }
            })
            .collect();
        text.push_str(&format!("{lhs} >= {}\n", rhs.join(" + ")));
    }
    text
}

pub fn all_words(alphabet: &Alphabet, max: usize) -> Vec<LabelWord> {
    (0..=max).flat_map(|k| alphabet.words_of_len(k)).collect()
}

#[derive(Debug, Default)]
pub struct EntailStats {
    pub queries: usize,
    pub positives: usize,
    /// Queries where the automaton and the search disagree.
    pub disagreements: Vec<String>,
}

/// Compares automaton entailment with breadth-first search for all pairs
/// of nodes whose words are at most `max_q` long.
pub fn compare_entails(sys: &utc_core::model::ConstraintSystem, max_q: usize, bound: usize) -> EntailStats {
    use utc_core::model::Node;
    use utc_core::reach::Reach;
    use utc_core::unfold::{brute_closure, brute_entails};
    let reach = Reach::for_system(sys);
    let words = all_words(&sys.alphabet, max_q);
    let nodes: Vec<Node> =
        sys.var_ids().flat_map(|v| words.iter().map(move |w| Node::new(w.clone(), v))).collect();
    let pops: Vec<_> = nodes.iter().map(|n| reach.pop_sets(n.var.0 as usize, &n.word.0)).collect();
    let pushes: Vec<_> = nodes.iter().map(|n| reach.push_sets(&n.word.0, n.var.0 as usize)).collect();
    let mut st = EntailStats::default();
    for (i, g) in nodes.iter().enumerate() {
        let (closure, truncated) = brute_closure(&sys.tree, g, bound);
        for (j, l) in nodes.iter().enumerate() {
            st.queries += 1;
            let k = g.word.0.iter().zip(&l.word.0).take_while(|(a, b)| a == b).count();
            let auto = (0..=k).any(|m| pops[i][m].intersects(&pushes[j][m]));
            let brute = closure.contains(l);
            if auto {
                st.positives += 1;
            }
            let agree = match (auto, brute) {
                (true, true) | (false, false) => true,
                (false, true) => false,
                (true, false) => truncated && brute_entails(&sys.tree, g, l, bound + 8) == Ok(true),
            };
            if !agree {
                let n = sys.names();
                st.disagreements.push(format!(
                    "{} >= {}: automaton {auto}, search {brute}",
                    n.node(g),
                    n.node(l)
                ));
            }
        }
    }
    st
}
