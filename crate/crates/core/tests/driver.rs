mod common;

use std::collections::BTreeSet;
use std::process::Command;

use common::random_tree_system;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use utc_core::driver::{certificate, revalidate, solve, Forbid, SolverConfig, Verdict};
use utc_core::parse::parse_system;
use utc_core::unfold::semi_decide_unsat;

const PINNED: &str = "@(x) = 1\n@(y) = 1\nx >= y\nl x <= x\nl y >= y";
const ESCAPE: &str = "labels: l r\n@(y) = 1\ny >= l y\ny >= r y\nl x >= x + y\nr x >= x + y\nx >= l r x";

fn bounded() -> SolverConfig {
    SolverConfig { max_steps: Some(5), ..SolverConfig::default() }
}

#[test]
fn certificate_for_pinned_roots() {
    let sys = parse_system(PINNED).unwrap();
    let solved = solve(&sys, &SolverConfig::default()).unwrap();
    let doc = certificate(&sys, &solved);
    assert_eq!(doc["schema"], "utc-certificate/1");
    assert_eq!(doc["verdict"], "sat");
    assert_eq!(doc["sat"]["scheme"]["period"], 1);
    let entries = doc["sat"]["scheme"]["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["word"] == "" && e["var"] == "x" && e["value"] == "1"));
    assert!(entries.iter().any(|e| e["word"] == "l" && e["var"] == "x" && e["value"] == "1"));
    // survives a trip through text
    let text = serde_json::to_string(&doc).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    revalidate(&sys, &back, 50).unwrap();
}

#[test]
fn tampered_certificates_are_rejected() {
    let sys = parse_system(PINNED).unwrap();
    let mut doc = certificate(&sys, &solve(&sys, &SolverConfig::default()).unwrap());
    for e in doc["sat"]["scheme"]["entries"].as_array_mut().unwrap() {
        if e["word"] == "l" && e["var"] == "x" {
            e["value"] = "0".into();
        }
    }
    assert!(revalidate(&sys, &doc, 50).is_err());

    let sys = parse_system("@(x) = 1\nx >= l x\nl x >= 2 x").unwrap();
    let mut doc = certificate(&sys, &solve(&sys, &SolverConfig::default()).unwrap());
    revalidate(&sys, &doc, 50).unwrap();
    doc["unsat"]["refutation"]["multipliers"][0] = "0".into();
    assert!(revalidate(&sys, &doc, 50).is_err());
}

#[test]
fn forbidding_infinity_changes_the_verdict() {
    let sys = parse_system(ESCAPE).unwrap();
    let free = solve(&sys, &SolverConfig::default()).unwrap();
    assert_eq!(free.verdict.kind(), "sat");
    let cfg = SolverConfig { forbid: Forbid::All, ..bounded() };
    let finite = solve(&sys, &cfg).unwrap();
    assert_eq!(finite.verdict.kind(), "unsat");
    revalidate(&sys, &certificate(&sys, &finite), 50).unwrap();
}

#[test]
fn unknown_variables_cannot_be_forbidden() {
    let sys = parse_system(PINNED).unwrap();
    let cfg = SolverConfig { forbid: Forbid::Vars(vec!["q".into()]), ..SolverConfig::default() };
    assert!(solve(&sys, &cfg).is_err());
}

#[test]
fn never_both_on_random_systems() {
    let mut rng = StdRng::seed_from_u64(5);
    let mut kinds = BTreeSet::new();
    for i in 0..60 {
        let n_cons = rng.gen_range(1..=3);
        let mut text = random_tree_system(&mut rng, 2, n_cons, 2);
        text.push_str(&format!("@(x) = {}\n", rng.gen_range(0..3)));
        let sys = parse_system(&text).unwrap();
        // over D almost everything is satisfiable, so half the runs stay finite
        let forbid = if i % 2 == 0 { Forbid::All } else { Forbid::Nothing };
        let solved = solve(&sys, &SolverConfig { forbid: forbid.clone(), ..bounded() }).unwrap();
        kinds.insert(solved.verdict.kind());
        let doc = certificate(&sys, &solved);
        match &solved.verdict {
            Verdict::Sat(_) => {
                revalidate(&sys, &doc, 50).unwrap();
                let all: BTreeSet<_> = if forbid == Forbid::All { sys.var_ids().collect() } else { BTreeSet::new() };
                assert!(semi_decide_unsat(&sys, 4, &all).is_none(), "{text}");
            }
            Verdict::Unsat(_) => {
                revalidate(&sys, &doc, 50).unwrap();
            }
            Verdict::Unknown => {}
        }
    }
    assert!(kinds.contains("sat") && kinds.contains("unsat"), "{kinds:?}");
}

#[test]
fn sequential_runs_are_deterministic() {
    let sys = parse_system(ESCAPE).unwrap();
    let a = certificate(&sys, &solve(&sys, &SolverConfig::default()).unwrap());
    let b = certificate(&sys, &solve(&sys, &SolverConfig::default()).unwrap());
    assert_eq!(a, b);
    let par = solve(&sys, &SolverConfig { parallel: true, ..SolverConfig::default() }).unwrap();
    assert_eq!(par.verdict.kind(), "sat");
}

fn cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_utc-solve")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn cli_exit_codes() {
    assert_eq!(cli(&[&data("pinned.utc")]).0, 0);
    assert_eq!(cli(&[&data("doubling.utc")]).0, 1);
    assert_eq!(cli(&[&data("bad.utc")]).0, 64);
    assert_eq!(cli(&[&data("missing.utc")]).0, 64);
    assert_eq!(cli(&[&data("escape.utc"), "--forbid-infinity", "all", "--max-steps", "0"]).0, 2);
}

#[test]
fn cli_writes_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cert.json");
    let (code, stdout) = cli(&[&data("escape.utc"), "--cert", out.to_str().unwrap(), "--explain"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("sat\n"), "{stdout}");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let sys = parse_system(&std::fs::read_to_string(data("escape.utc")).unwrap()).unwrap();
    revalidate(&sys, &doc, 50).unwrap();
}

#[test]
fn finite_runs_never_use_infinity() {
    // x ≥ y below every prefix, so l l y ≥ l l x + x needs an infinite l l x
    let sys = parse_system("labels: l r\nx >= 2 l r x + y\nl l y >= l l x + x\n@(x) = 1").unwrap();
    let free = solve(&sys, &SolverConfig::default()).unwrap();
    let mut doc = certificate(&sys, &free);
    assert_eq!(doc["verdict"], "sat");
    revalidate(&sys, &doc, 50).unwrap();
    doc["finite"] = serde_json::json!(["x"]);
    assert!(revalidate(&sys, &doc, 50).is_err());
    let finite = solve(&sys, &SolverConfig { forbid: Forbid::All, ..bounded() }).unwrap();
    assert_eq!(finite.verdict.kind(), "unsat");
}
