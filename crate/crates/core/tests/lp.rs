use utc_core::ext::ExtValue;
use utc_core::lp::{d_feasible, must_fin, q_feasible, LinearProgram, Refutation};

fn lp(text: &str) -> LinearProgram {
    LinearProgram::from_text(text).unwrap()
}

#[test]
fn text_round_trip() {
    let p = lp("# maximize e\n# finite a\n2 * a + 1/2 >= b\na = 3\ne <= 1\n");
    assert_eq!(LinearProgram::from_text(&p.to_text()).unwrap(), p);
    assert!(LinearProgram::from_text("a >= -1 * b").is_err());
}

#[test]
fn rational_optimum_is_reported() {
    let p = lp("# maximize e\ne <= 1\na >= e\n3 >= a\n");
    let w = q_feasible(&p).witness().cloned().unwrap();
    assert_eq!(w["e"], ExtValue::from_int(1));
    assert!(p.check(&w).is_ok());
}

#[test]
fn farkas_refutation_survives_json() {
    let p = lp("x >= 2\n1 >= x\n");
    let r = q_feasible(&p).refutation().cloned().unwrap();
    r.verify(&p).unwrap();
    assert_eq!(r.conclusion(&p), "0 >= 1");
    let back: Refutation = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn finiteness_propagates_downward() {
    let p = lp("1 >= a\na >= b + c\nd >= a\n");
    let mf = must_fin(&p).vars();
    assert!(mf.contains("a") && mf.contains("b") && mf.contains("c"));
    assert!(!mf.contains("d"));
    let w = d_feasible(&p).witness().cloned().unwrap();
    assert_eq!(w["d"], ExtValue::Inf);
}

#[test]
fn equalities_bind_both_ways() {
    let p = lp("a = b + 1\nb = a\n");
    assert!(d_feasible(&p).is_feasible());
    let mut q = p.clone();
    q.forced_finite.insert("a".into());
    let r = d_feasible(&q).refutation().cloned().unwrap();
    r.verify(&q).unwrap();
}
