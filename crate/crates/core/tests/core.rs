use proptest::prelude::*;
use utc_core::ext::{ext_add, rat, ExtValue};
use utc_core::parse::{parse_system, ParseError};

fn grid() -> Vec<ExtValue> {
    let mut v: Vec<ExtValue> = [(0, 1), (1, 3), (1, 2), (1, 1), (3, 2), (5, 1)]
        .iter()
        .map(|&(n, d)| ExtValue::Fin(rat(n, d)))
        .collect();
    v.push(ExtValue::Inf);
    v
}

#[test]
fn addition_is_associative_and_commutative() {
    let g = grid();
    for a in &g {
        for b in &g {
            assert_eq!(ext_add(a, b), ext_add(b, a));
            for c in &g {
                assert_eq!(ext_add(&ext_add(a, b), c), ext_add(a, &ext_add(b, c)));
            }
        }
    }
}

#[test]
fn infinity_is_maximal_and_absorbing() {
    for a in grid() {
        assert!(a <= ExtValue::Inf);
        assert_eq!(ext_add(&a, &ExtValue::Inf), ExtValue::Inf);
    }
}

#[test]
fn values_print_and_parse() {
    for a in grid() {
        let back: ExtValue = a.to_string().parse().unwrap();
        assert_eq!(back, a);
    }
}

#[test]
fn fragment_gate() {
    assert!(matches!(parse_system("r t2 = 2 t2"), Err(ParseError::NonUnilateral { line: 1, .. })));
    assert!(parse_system("r t1 >= 2 t1").is_ok());
    assert!(matches!(parse_system("labels: l\nq x >= x"), Err(ParseError::UnknownLabel { .. })));
    assert!(matches!(parse_system("x >= @(y)"), Err(ParseError::MixedAtom { .. })));
}

#[test]
fn bilateral_equation_splits_into_two() {
    let sys = parse_system("l x = y").unwrap();
    assert_eq!(sys.tree.len(), 2);
}

fn atom() -> impl Strategy<Value = String> {
    (prop::collection::vec(prop::sample::select(vec!["l", "r"]), 0..3), prop::sample::select(vec!["x", "y", "z"]))
        .prop_map(|(w, v)| if w.is_empty() { v.to_string() } else { format!("{} {v}", w.join(" ")) })
}

fn term() -> impl Strategy<Value = String> {
    (1u32..4, atom()).prop_map(|(n, a)| if n == 1 { a } else { format!("{n} {a}") })
}

fn constraint() -> impl Strategy<Value = String> {
    prop_oneof![
        (atom(), prop::collection::vec(term(), 1..3)).prop_map(|(g, s)| format!("{g} >= {}", s.join(" + "))),
        (atom(), prop::collection::vec(term(), 1..3)).prop_map(|(g, s)| format!("{} <= {g}", s.join(" + "))),
        (prop::sample::select(vec!["x", "y", "z"]), 0u32..5).prop_map(|(v, c)| format!("@({v}) >= {c}")),
    ]
}

proptest! {
    #[test]
    fn printing_round_trips(cs in prop::collection::vec(constraint(), 1..5)) {
        let text = format!("labels: l r\n{}", cs.join("\n"));
        let sys = parse_system(&text).unwrap();
        let printed = sys.to_string();
        let again = parse_system(&printed).unwrap();
        prop_assert_eq!(again.to_string(), printed);
        prop_assert_eq!(again.tree.len(), sys.tree.len());
        prop_assert_eq!(again.arith.len(), sys.arith.len());
    }
}
