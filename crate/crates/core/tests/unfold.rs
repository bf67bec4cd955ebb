use std::collections::{BTreeMap, BTreeSet};

use utc_core::ext::ExtValue;
use utc_core::lp::{d_feasible, q_feasible, LinearProgram};
use utc_core::model::Node;
use utc_core::parse::parse_system;
use utc_core::unfold::{
    brute_entails, check_assignment, semi_decide_unsat, solve_window, unfold_step, TableValuation, UnfoldState,
};

#[test]
fn doubling_is_refuted_early() {
    let sys = parse_system("@(x) = 1\nx >= l x\nl x >= 2 x").unwrap();
    let cert = semi_decide_unsat(&sys, 2, &BTreeSet::new()).expect("refuted");
    assert!(cert.level <= 2);
    cert.refutation.verify(&cert.program).unwrap();
    assert_eq!(cert.refutation.conclusion(&cert.program), "0 >= 1");
}

#[test]
fn programs_grow_by_one_level() {
    let sys = parse_system("labels: l r\n@(x) = 1\nx >= l x + r x").unwrap();
    let mut st = UnfoldState::new(&sys, &BTreeSet::new());
    let before = st.program.constraints.len();
    unfold_step(&sys, &mut st);
    assert_eq!(st.level, 1);
    assert_eq!(st.program.constraints.len(), before + 2);
}

#[test]
fn constant_table_is_checked_exhaustively() {
    let sys = parse_system("@(x) = 2\nx >= l x").unwrap();
    let v = TableValuation { default: Some(ExtValue::from_int(2)), ..Default::default() };
    let r = check_assignment(&sys, &v, 10);
    assert!(r.passed());
}

#[test]
fn checker_reports_the_first_violation() {
    let sys = parse_system("@(x) = 1\nl x >= x + x").unwrap();
    let mut v = TableValuation { default: Some(ExtValue::from_int(1)), ..Default::default() };
    v.nodes.insert(Node::var(sys.var_id("x").unwrap()), ExtValue::from_int(1));
    let r = check_assignment(&sys, &v, 5);
    let bad = r.violation.expect("violated");
    assert_eq!(bad.constraint, "l x >= 2 * x");
    assert_eq!(bad.prefix, "");
    // with infinity below the root the same system holds
    let mut w = TableValuation { default: Some(ExtValue::Inf), ..Default::default() };
    w.nodes.insert(Node::var(sys.var_id("x").unwrap()), ExtValue::from_int(1));
    assert!(check_assignment(&sys, &w, 5).passed());
}

#[test]
fn search_oracle_follows_label_application() {
    let sys = parse_system("l x >= x\nx >= y").unwrap();
    let n = |s: &str| sys.parse_node(s).unwrap();
    assert_eq!(brute_entails(&sys.tree, &n("l l x"), &n("y"), 4), Ok(true));
    assert_eq!(brute_entails(&sys.tree, &n("l l x"), &n("l l l y"), 4), Ok(false));
    assert_eq!(brute_entails(&sys.tree, &n("l x"), &n("l y"), 4), Ok(true));
}

#[test]
fn window_scheme_for_a_binary_tree() {
    let sys = parse_system("labels: l r\n@(x) = 1\nx >= l x\nx >= r x").unwrap();
    let x = sys.var_id("x").unwrap();
    let (s, lp, w) = solve_window(&sys, 0, 1, &BTreeSet::from([x])).expect("feasible");
    assert!(lp.check(&w).is_ok());
    let r = check_assignment(&sys, &s, 30);
    assert!(r.passed() && r.exhaustive);
}

#[test]
fn extended_and_rational_feasibility_differ_on_absorption() {
    let lp = LinearProgram::from_text("x >= x + 1\n").unwrap();
    assert!(!q_feasible(&lp).is_feasible());
    let w = d_feasible(&lp).witness().cloned().unwrap();
    assert_eq!(w, BTreeMap::from([("x".to_string(), ExtValue::Inf)]));
}
