mod common;

use common::{compare_entails, random_tree_system, regex, show};
use rand::rngs::StdRng;
use rand::SeedableRng;
use utc_core::model::LabelWord;
use utc_core::parse::parse_system;
use utc_core::reach::{bounded_languages, Reach};
use utc_core::unfold::brute_entails;

const CHAIN: &str = "l x >= x\nx >= r z\nl r z >= l l y\nl y >= y";

#[test]
fn chain_languages() {
    let sys = parse_system(CHAIN).unwrap();
    let reach = Reach::for_system(&sys);
    let (x, y) = (0, sys.var_id("y").unwrap().0 as usize);
    let e = LabelWord::empty();
    let l = sys.alphabet.parse_word("l").unwrap();
    let plus = regex(&sys.alphabet, "l+");
    let star = regex(&sys.alphabet, "l*");
    assert_eq!(reach.language_for(&e, x, &e, y).equivalent(&plus), Ok(()));
    assert_eq!(reach.language_for(&e, x, &l, y).equivalent(&plus), Ok(()));
    assert_eq!(reach.language_for(&l, x, &e, y).equivalent(&star), Ok(()));
}

#[test]
fn one_sided_languages() {
    let sys = parse_system("@(x) = 1\nl r x >= x\nl x >= x\nm x >= x\nx >= r l x\nx >= m l x").unwrap();
    let reach = Reach::for_system(&sys);
    let x = sys.parse_node("x").unwrap();
    let bl = bounded_languages(reach, vec![x]);
    let geq = bl.geq_automaton(0, 0);
    let leq = bl.leq_automaton(0, 0);
    assert_eq!(geq.equivalent(&regex(&sys.alphabet, "(lr|l|m)*")), Ok(()));
    // x ≥ r l x ≥ r x: the upper language is larger than (ml|rl)*
    assert_eq!(leq.equivalent(&regex(&sys.alphabet, "((r|m)l?)*")), Ok(()));
    let w = leq.equivalent(&regex(&sys.alphabet, "(ml|rl)*")).unwrap_err();
    assert_eq!(show(&sys.alphabet, &w), "r");
    let (x, rx) = (sys.parse_node("x").unwrap(), sys.parse_node("r x").unwrap());
    assert_eq!(brute_entails(&sys.tree, &x, &rx, 4), Ok(true));
    let both = geq.intersect(&leq);
    assert!(both.accepts(&[]));
    assert!(both.accepts(&common::word(&sys.alphabet, "mlml")));
    let w = both.equivalent(&regex(&sys.alphabet, "m(lr)*l")).unwrap_err();
    assert_eq!(show(&sys.alphabet, &w), "");
}

#[test]
fn pointwise_bounds_match_automata() {
    let sys = parse_system("@(x) = 1\nl r x >= x\nl x >= x\nm x >= x\nx >= r l x\nx >= m l x").unwrap();
    let x = sys.parse_node("x").unwrap();
    let bl = bounded_languages(Reach::for_system(&sys), vec![x.clone()]);
    let geq = bl.geq_automaton(0, 0);
    let leq = bl.leq_automaton(0, 0);
    for w in common::all_words(&sys.alphabet, 5) {
        let n = utc_core::model::Node::new(w.clone(), x.var);
        assert_eq!(!bl.lower_bounds(&n).is_empty(), geq.accepts(&w.0));
        assert_eq!(!bl.upper_bounds(&n).is_empty(), leq.accepts(&w.0));
    }
}

#[test]
fn automaton_agrees_with_search_on_random_systems() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..40 {
        let text = random_tree_system(&mut rng, 3, 3, 2);
        let sys = parse_system(&text).unwrap();
        let st = compare_entails(&sys, 4, 8);
        assert!(st.disagreements.is_empty(), "{text}\n{:?}", &st.disagreements[..st.disagreements.len().min(5)]);
    }
}

#[test]
fn adding_constraints_never_shrinks_languages() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..20 {
        let a = random_tree_system(&mut rng, 3, 2, 2);
        let b = random_tree_system(&mut rng, 3, 1, 2);
        let sa = parse_system(&a).unwrap();
        let both = format!("{a}{}", b.trim_start_matches("labels: l r\n"));
        let sb = parse_system(&both).unwrap();
        let e = LabelWord::empty();
        for x in 0..sa.vars.len() {
            for y in 0..sa.vars.len() {
                let small = Reach::for_system(&sa).language_for(&e, x, &e, y);
                // variable ids agree because the first system is a prefix
                let big = Reach::for_system(&sb).language_for(&e, x, &e, y);
                let missing = small.intersect(&complement(&big, sa.alphabet.len()));
                assert!(missing.is_empty(), "{both}");
            }
        }
    }
}

fn complement(n: &utc_core::reach::Nfa, k: usize) -> utc_core::reach::Nfa {
    let d = n.determinize();
    let mut c = utc_core::reach::Nfa::new(k);
    for _ in 0..d.trans.len() {
        c.add_state(false);
    }
    for (s, row) in d.trans.iter().enumerate() {
        c.accept[s] = !d.accept[s];
        for (l, &t) in row.iter().enumerate() {
            c.add_edge(s, utc_core::model::Label(l as u32), t);
        }
    }
    c.start.insert(0);
    c
}
