use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use utc_core::driver::{certificate, revalidate, solve, Forbid, SolverConfig, Verdict};
use utc_core::model::LabelWord;
use utc_core::parse::parse_system;
use utc_core::reach::Reach;

const INPUT_ERROR: u8 = 64;

/// Decide a system of unilateral tree constraints over the nonnegative
/// rationals extended by infinity.
#[derive(Parser)]
#[command(name = "utc-solve", version)]
struct Cli {
    /// Constraint file
    file: PathBuf,

    /// Give up with `unknown` after this many rounds
    #[arg(long)]
    max_steps: Option<usize>,

    /// Depth for the independent check of Sat schemes
    #[arg(long, default_value_t = 50)]
    checker_depth: usize,

    /// Variables that must stay finite, comma separated, or `all`
    #[arg(long, value_name = "VARS")]
    forbid_infinity: Option<String>,

    /// Write the certificate JSON here
    #[arg(long, value_name = "OUT.json")]
    cert: Option<PathBuf>,

    /// Try zero/infinity patterns in parallel
    #[arg(long)]
    parallel: bool,

    #[arg(long)]
    dump_normal_form: bool,

    /// Print the entailment automaton between each pair of root variables
    #[arg(long)]
    dump_automata: bool,

    /// Print how the verdict was reached
    #[arg(long)]
    explain: bool,
}

fn forbid(arg: Option<&str>) -> Forbid {
    match arg {
        None => Forbid::Nothing,
        Some("all") => Forbid::All,
        Some(s) => Forbid::Vars(s.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.file.display());
            return ExitCode::from(INPUT_ERROR);
        }
    };
    let sys = match parse_system(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };

    if cli.dump_automata {
        let reach = Reach::for_system(&sys);
        let e = LabelWord::empty();
        for x in sys.var_ids() {
            for y in sys.var_ids() {
                let nfa = reach.language_for(&e, x.0 as usize, &e, y.0 as usize);
                println!("# w with {} >= w {}", sys.var_name(x), sys.var_name(y));
                print!("{}", nfa.to_text(&sys.alphabet));
            }
        }
    }

    let cfg = SolverConfig {
        checker_depth: cli.checker_depth,
        max_steps: cli.max_steps,
        forbid: forbid(cli.forbid_infinity.as_deref()),
        parallel: cli.parallel,
        ..SolverConfig::default()
    };
    let solved = match solve(&sys, &cfg) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(INPUT_ERROR);
        }
    };
    if cli.dump_normal_form {
        println!("# normal form");
        print!("{}", solved.normal_form);
    }

    let doc = certificate(&sys, &solved);
    println!("{}", solved.verdict.kind());
    if !matches!(solved.verdict, Verdict::Unknown) {
        match revalidate(&sys, &doc, cfg.checker_depth) {
            Ok(summary) => {
                if cli.explain {
                    println!("{summary}");
                }
            }
            Err(e) => {
                eprintln!("internal error: certificate rejected: {e}");
                return ExitCode::from(70);
            }
        }
    }
    if cli.explain {
        let s = &solved.stats;
        println!(
            "rounds {}, unfolded to level {}, {} patterns, {} propagations, {} windows",
            s.rounds, s.unfold_level, s.patterns_tried, s.propagations, s.windows_tried
        );
        match &solved.verdict {
            Verdict::Sat(c) => {
                let names = sys.names();
                println!("route: {:?}, boundary {}, period {}", c.route, c.scheme.boundary, c.scheme.period);
                for e in c.scheme.entries(&names) {
                    let w = if e.word.is_empty() { String::new() } else { format!("{} ", e.word) };
                    println!("  {}{} = {}", w, e.var, e.value);
                }
            }
            Verdict::Unsat(c) => println!("{}", c.refutation.conclusion(&c.program)),
            Verdict::Unknown => {}
        }
    }
    if let Some(path) = &cli.cert {
        let body = serde_json::to_string_pretty(&doc).expect("certificate serializes");
        if let Err(e) = std::fs::write(path, body + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(INPUT_ERROR);
        }
    }
    ExitCode::from(match solved.verdict {
        Verdict::Sat(_) => 0,
        Verdict::Unsat(_) => 1,
        Verdict::Unknown => 2,
    })
}
