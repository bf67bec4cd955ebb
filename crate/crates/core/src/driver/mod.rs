//! The decision procedure: the refutation search and the solution search
//! interleaved in rounds of growing budget, each result revalidated before
//! it is reported.

mod cert;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::interval::{
    compute_s, emit_lp, propagate, scheme_from_classes, Pattern, PropagationOutcome, Stable, EPS,
};
use crate::lp::{must_fin, q_feasible, LinearProgram, Witness};
use crate::model::{ConstraintSystem, Node, VarId};
use crate::normal::{normalize, ArithVar, NormalFormSystem};
use crate::unfold::{
    check_assignment, lp_constraint, solve_window, test_level, unfold_step, Report, UnfoldState, UnsatCertificate,
    WindowScheme,
};

pub use cert::{certificate, revalidate, SCHEMA};

/// Variables whose nodes must stay finite.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Forbid {
    #[default]
    Nothing,
    All,
    Vars(Vec<String>),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Propagation levels in the first round.
    pub initial_budget: usize,
    pub growth: usize,
    pub checker_depth: usize,
    /// Rounds before giving up with `Unknown`; unlimited when `None`.
    pub max_steps: Option<usize>,
    pub forbid: Forbid,
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { initial_budget: 2, growth: 2, checker_depth: 50, max_steps: None, forbid: Forbid::Nothing, parallel: false }
    }
}

/// How the solution was found.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Interval classes under a zero/infinity pattern.
    Classes,
    /// A direct search over periodic tables.
    Window,
}

#[derive(Clone, Debug)]
pub struct SatCertificate {
    pub route: Route,
    pub classes: Option<Stable>,
    pub program: LinearProgram,
    pub witness: Witness,
    pub scheme: WindowScheme,
    pub report: Report,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Sat(Box<SatCertificate>),
    Unsat(UnsatCertificate),
    Unknown,
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat(_) => "unsat",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    pub rounds: usize,
    pub unfold_level: usize,
    pub patterns_tried: usize,
    pub propagations: usize,
    pub windows_tried: usize,
}

#[derive(Clone, Debug)]
pub struct Solved {
    pub verdict: Verdict,
    pub stats: Stats,
    pub normal_form: NormalFormSystem,
    /// Variables that had to stay finite.
    pub finite: BTreeSet<VarId>,
}

fn forbidden(sys: &ConstraintSystem, f: &Forbid) -> Result<BTreeSet<VarId>, String> {
    match f {
        Forbid::Nothing => Ok(BTreeSet::new()),
        Forbid::All => Ok(sys.var_ids().collect()),
        Forbid::Vars(vs) => vs
            .iter()
            .map(|v| sys.var_id(v).ok_or_else(|| format!("unknown variable `{v}`")))
            .collect(),
    }
}

/// Patterns by ascending size, with the largest admissible set of infinite
/// variables right after the patterns of size at most one.
pub fn pattern_order(nf: &NormalFormSystem, forbid: &BTreeSet<VarId>, max_size: usize) -> Vec<Pattern> {
    let names = nf.names();
    let vars: Vec<Node> =
        nf.arith_vars.iter().filter_map(|v| if let ArithVar::Node(n) = v { Some(n.clone()) } else { None }).collect();
    let mut lp = LinearProgram::new();
    for c in &nf.arith {
        lp.push(lp_constraint(&names, c));
    }
    for n in &vars {
        if forbid.contains(&n.var) {
            lp.forced_finite.insert(names.root(n));
        }
    }
    let finite = must_fin(&lp).vars();
    let eligible: BTreeSet<Node> = vars.iter().filter(|n| !finite.contains(&names.root(n))).cloned().collect();
    let mut out: Vec<Pattern> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut emit = |p: Pattern, out: &mut Vec<Pattern>| {
        if seen.insert(p.clone()) {
            out.push(p);
        }
    };
    for size in 0..=max_size.min(vars.len()) {
        for combo in combinations(vars.len(), size) {
            for mask in 0..(1u32 << size) {
                let mut p = Pattern::default();
                let mut ok = true;
                for (bit, &i) in combo.iter().enumerate() {
                    if mask & (1 << bit) == 0 {
                        p.zero.insert(vars[i].clone());
                    } else if eligible.contains(&vars[i]) {
                        p.inf.insert(vars[i].clone());
                    } else {
                        ok = false;
                    }
                }
                if ok {
                    emit(p, &mut out);
                }
            }
        }
        if size == 1 && !eligible.is_empty() {
            emit(Pattern { zero: BTreeSet::new(), inf: eligible.clone() }, &mut out);
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

enum PatternResult {
    Found(Box<SatCertificate>),
    Again,
    Dead,
}

fn try_pattern(
    sys: &ConstraintSystem,
    nf: &NormalFormSystem,
    p: &Pattern,
    forbid: &BTreeSet<VarId>,
    budget: usize,
    depth: usize,
) -> PatternResult {
    let st = match propagate(sys, nf, p, budget) {
        PropagationOutcome::Stabilized(st) => st,
        PropagationOutcome::BudgetExceeded { .. } => return PatternResult::Again,
        PropagationOutcome::ImmediateConflict { .. } => return PatternResult::Dead,
    };
    let Ok(lp) = emit_lp(&st, nf) else { return PatternResult::Dead };
    let Some(w) = q_feasible(&lp).witness().cloned() else { return PatternResult::Dead };
    if lp.maximize.is_some() && w.get(EPS).is_none_or(|e| *e == crate::ext::ExtValue::zero()) {
        return PatternResult::Dead;
    }
    let scheme = scheme_from_classes(&st, nf, &w);
    // lower endpoints off the arithmetic variables may still be infinite
    if scheme.table.iter().any(|(n, v)| v.is_inf() && forbid.contains(&n.var)) {
        return PatternResult::Dead;
    }
    let report = check_assignment(sys, &scheme, depth);
    if !report.passed() || !report.exhaustive {
        return PatternResult::Dead;
    }
    PatternResult::Found(Box::new(SatCertificate {
        route: Route::Classes,
        classes: Some(st),
        program: lp,
        witness: w,
        scheme,
        report,
    }))
}

fn try_window(
    sys: &ConstraintSystem,
    boundary: usize,
    period: usize,
    forbid: &BTreeSet<VarId>,
    depth: usize,
) -> Option<Box<SatCertificate>> {
    let (scheme, program, witness) = solve_window(sys, boundary, period, forbid)?;
    let report = check_assignment(sys, &scheme, depth);
    (report.passed() && report.exhaustive).then(|| {
        Box::new(SatCertificate { route: Route::Window, classes: None, program, witness, scheme, report })
    })
}

/// Largest table a window search may build.
const WINDOW_CAP: usize = 2048;

/// Decides the system.
pub fn solve(sys: &ConstraintSystem, cfg: &SolverConfig) -> Result<Solved, String> {
    if cfg.initial_budget == 0 || cfg.growth < 2 {
        return Err("budgets must be positive and grow".into());
    }
    let forbid = forbidden(sys, &cfg.forbid)?;
    let nf = normalize(sys);
    let s = compute_s(sys);
    let mut stats = Stats::default();
    let mut unfold = UnfoldState::new(sys, &forbid);
    let mut live: BTreeMap<Pattern, bool> = BTreeMap::new();
    let mut windows_done: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut periods = vec![1, s];
    periods.dedup();
    let k = sys.alphabet.len().max(1);
    let done = |verdict: Verdict, stats: Stats| Ok(Solved { verdict, stats, normal_form: nf.clone(), finite: forbid.clone() });
    for round in 0.. {
        if cfg.max_steps.is_some_and(|m| round >= m) {
            return done(Verdict::Unknown, stats);
        }
        stats.rounds = round + 1;
        let budget = cfg.initial_budget.saturating_mul(cfg.growth.saturating_pow(round.min(6) as u32));

        // refutation side: one more level
        if round > 0 && !sys.alphabet.is_empty() {
            unfold_step(sys, &mut unfold);
        }
        stats.unfold_level = unfold.level;
        if let Some(c) = test_level(&unfold) {
            debug_assert!(c.refutation.verify(&c.program).is_ok());
            if c.refutation.verify(&c.program).is_ok() {
                return done(Verdict::Unsat(c), stats);
            }
        }

        // solution side: patterns of size up to the round number
        let mut ordered = pattern_order(&nf, &forbid, round);
        ordered.retain(|p| live.get(p) != Some(&false));
        for p in &ordered {
            live.entry(p.clone()).or_insert(true);
        }
        stats.patterns_tried = live.len();
        stats.propagations += ordered.len();
        let depth = cfg.checker_depth;
        let results: Vec<PatternResult> = if cfg.parallel {
            ordered.par_iter().map(|p| try_pattern(sys, &nf, p, &forbid, budget, depth)).collect()
        } else {
            let mut v = Vec::new();
            for p in &ordered {
                let r = try_pattern(sys, &nf, p, &forbid, budget, depth);
                let found = matches!(r, PatternResult::Found(_));
                v.push(r);
                if found {
                    break;
                }
            }
            v
        };
        for (p, r) in ordered.iter().zip(results) {
            match r {
                PatternResult::Found(c) => return done(Verdict::Sat(c), stats),
                PatternResult::Dead => {
                    live.insert(p.clone(), false);
                }
                PatternResult::Again => {}
            }
        }

        // solution side: periodic tables with window up to round + 1
        for total in 1..=round + 1 {
            for &period in &periods {
                if period > total || k.saturating_pow(total as u32) > WINDOW_CAP {
                    continue;
                }
                let boundary = total - period;
                if !windows_done.insert((boundary, period)) {
                    continue;
                }
                stats.windows_tried += 1;
                if let Some(c) = try_window(sys, boundary, period, &forbid, depth) {
                    return done(Verdict::Sat(c), stats);
                }
            }
        }
    }
    unreachable!("the round loop only exits by returning")
}
