//! Certificate documents and their independent revalidation.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::{Solved, Verdict};
use crate::ext::ExtValue;
use crate::interval::show_classes;
use crate::lp::{LinearProgram, Refutation};
use crate::model::{ConstraintSystem, Node};
use crate::unfold::{check_assignment, WindowScheme};

pub const SCHEMA: &str = "utc-certificate/1";

fn values(w: &BTreeMap<String, ExtValue>) -> Value {
    Value::Object(w.iter().map(|(k, v)| (k.clone(), Value::String(v.to_string()))).collect())
}

/// The certificate document for a solver outcome.
pub fn certificate(sys: &ConstraintSystem, solved: &Solved) -> Value {
    let names = sys.names();
    let mut doc = json!({
        "schema": SCHEMA,
        "verdict": solved.verdict.kind(),
        "system": sys.to_string(),
        "semantics": "values in the nonnegative rationals extended by inf",
        "stats": solved.stats,
        "finite": solved.finite.iter().map(|v| sys.var_name(*v)).collect::<Vec<_>>(),
    });
    let mut notes: Vec<String> = Vec::new();
    match &solved.verdict {
        Verdict::Sat(c) => {
            let s = &c.scheme;
            if s.table.values().any(ExtValue::is_inf) {
                notes.push("the solution uses inf; it is not a solution over finite values".into());
            }
            doc["sat"] = json!({
                "route": c.route,
                "pattern": c.classes.as_ref().map(|st| st.pattern.describe(&solved.normal_form.names())),
                "classes": c.classes.as_ref().map(|st| json!({
                    "start": st.start,
                    "period": st.period,
                    "table": show_classes(st, &solved.normal_form.names()),
                })),
                "program": c.program.to_text(),
                "witness": values(&c.witness),
                "scheme": {
                    "boundary": s.boundary,
                    "period": s.period,
                    "entries": s.entries(&names),
                    "lambdas": values(&s.lambdas),
                },
                "check": c.report,
            });
        }
        Verdict::Unsat(c) => {
            doc["unsat"] = json!({
                "level": c.level,
                "program": c.program.to_text(),
                "refutation": c.refutation,
                "conclusion": c.refutation.conclusion(&c.program),
            });
            notes.push("programs are tested over the extended domain, so variables not forced finite may be inf".into());
        }
        Verdict::Unknown => notes.push("the round limit was reached".into()),
    }
    doc["notes"] = json!(notes);
    doc
}

fn field<'a>(v: &'a Value, path: &[&str]) -> Result<&'a Value, String> {
    let mut cur = v;
    for p in path {
        cur = cur.get(*p).ok_or_else(|| format!("missing field `{}`", path.join(".")))?;
    }
    Ok(cur)
}

fn text<'a>(v: &'a Value, path: &[&str]) -> Result<&'a str, String> {
    field(v, path)?.as_str().ok_or_else(|| format!("`{}` is not a string", path.join(".")))
}

fn number(v: &Value, path: &[&str]) -> Result<usize, String> {
    field(v, path)?.as_u64().map(|n| n as usize).ok_or_else(|| format!("`{}` is not a number", path.join(".")))
}

fn ext(s: &str) -> Result<ExtValue, String> {
    s.parse().map_err(|_| format!("bad value `{s}`"))
}

/// Rebuilds the scheme of a Sat certificate.
pub fn scheme_of(sys: &ConstraintSystem, doc: &Value) -> Result<WindowScheme, String> {
    let s = field(doc, &["sat", "scheme"])?;
    let mut table = BTreeMap::new();
    for e in field(s, &["entries"])?.as_array().ok_or("entries must be a list")? {
        let word = sys.alphabet.parse_word(text(e, &["word"])?).ok_or("unknown label in scheme")?;
        let var = sys.var_id(text(e, &["var"])?).ok_or("unknown variable in scheme")?;
        table.insert(Node::new(word, var), ext(text(e, &["value"])?)?);
    }
    let mut lambdas = BTreeMap::new();
    for (k, v) in field(s, &["lambdas"])?.as_object().ok_or("lambdas must be an object")? {
        lambdas.insert(k.clone(), ext(v.as_str().ok_or("lambda values are strings")?)?);
    }
    Ok(WindowScheme { boundary: number(s, &["boundary"])?, period: number(s, &["period"])?, table, lambdas })
}

/// Checks a certificate against the system using only the checker and the
/// arithmetic of refutations. Returns a one-line summary.
pub fn revalidate(sys: &ConstraintSystem, doc: &Value, depth: usize) -> Result<String, String> {
    if text(doc, &["schema"])? != SCHEMA {
        return Err("unknown certificate schema".into());
    }
    match text(doc, &["verdict"])? {
        "sat" => {
            let scheme = scheme_of(sys, doc)?;
            if scheme.period == 0 {
                return Err("period must be positive".into());
            }
            for name in field(doc, &["finite"])?.as_array().ok_or("finite must be a list")? {
                let name = name.as_str().ok_or("finite lists variable names")?;
                let v = sys.var_id(name).ok_or_else(|| format!("unknown variable `{name}`"))?;
                if scheme.table.iter().any(|(n, x)| n.var == v && x.is_inf()) {
                    return Err(format!("`{name}` must stay finite"));
                }
            }
            let r = check_assignment(sys, &scheme, depth);
            if let Some(v) = r.violation {
                return Err(format!("`{}` fails under prefix `{}`", v.constraint, v.prefix));
            }
            if !r.exhaustive {
                return Err(format!("check to depth {depth} did not cover every prefix class"));
            }
            Ok(format!("sat: scheme verified on {} prefix classes", r.prefixes_checked))
        }
        "unsat" => {
            let lp = LinearProgram::from_text(text(doc, &["unsat", "program"])?)?;
            let r: Refutation = serde_json::from_value(field(doc, &["unsat", "refutation"])?.clone())
                .map_err(|e| format!("bad refutation: {e}"))?;
            r.verify(&lp)?;
            // the program must be implied by the system itself
            let level = number(doc, &["unsat", "level"])?;
            let forbid = lp.forced_finite.iter().filter_map(|a| {
                let inner = a.strip_prefix("@(")?.strip_suffix(')')?;
                sys.parse_node(inner).map(|n| n.var)
            });
            let mut st = crate::unfold::UnfoldState::new(sys, &forbid.collect());
            while st.level < level {
                crate::unfold::unfold_step(sys, &mut st);
            }
            let ours: std::collections::BTreeSet<String> =
                st.program.constraints.iter().map(|c| c.to_string()).collect();
            if let Some(c) = lp.constraints.iter().zip(&r.multipliers).find(|(c, y)| {
                !num_traits::Zero::is_zero(*y) && !ours.contains(&c.to_string())
            }) {
                return Err(format!("`{}` is not a consequence of the system", c.0));
            }
            Ok(format!("unsat: refutation at level {level} verified, {}", r.conclusion(&lp)))
        }
        other => Err(format!("nothing to check for verdict `{other}`")),
    }
}
