use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use utc_core::driver::{certificate, revalidate, solve, Forbid, SolverConfig};
use utc_core::parse::parse_system;
use utc_core::reach::Reach;

fn system(text: &str) -> PyResult<utc_core::model::ConstraintSystem> {
    parse_system(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Parses a system and prints it back in canonical form.
#[pyfunction]
fn parse(text: &str) -> PyResult<String> {
    Ok(system(text)?.to_string())
}

/// Solves a system and returns the certificate as JSON text.
#[pyfunction]
#[pyo3(signature = (text, max_steps=None, forbid_infinity=None, checker_depth=50))]
fn solve_json(text: &str, max_steps: Option<usize>, forbid_infinity: Option<Vec<String>>, checker_depth: usize) -> PyResult<String> {
    let sys = system(text)?;
    let cfg = SolverConfig {
        max_steps,
        checker_depth,
        forbid: forbid_infinity.map_or(Forbid::Nothing, Forbid::Vars),
        ..SolverConfig::default()
    };
    let solved = solve(&sys, &cfg).map_err(PyValueError::new_err)?;
    Ok(certificate(&sys, &solved).to_string())
}

/// Checks a certificate produced by `solve_json` against the system.
#[pyfunction]
#[pyo3(signature = (text, cert, depth=50))]
fn check_certificate(text: &str, cert: &str, depth: usize) -> PyResult<String> {
    let sys = system(text)?;
    let doc: serde_json::Value = serde_json::from_str(cert).map_err(|e| PyValueError::new_err(e.to_string()))?;
    revalidate(&sys, &doc, depth).map_err(PyValueError::new_err)
}

/// Whether `greater >= lesser` follows from the tree constraints alone.
#[pyfunction]
fn entails(text: &str, greater: &str, lesser: &str) -> PyResult<bool> {
    let sys = system(text)?;
    let node = |s: &str| sys.parse_node(s).ok_or_else(|| PyValueError::new_err(format!("bad node `{s}`")));
    let (g, l) = (node(greater)?, node(lesser)?);
    Ok(Reach::for_system(&sys).entails_nodes(&g, &l))
}

#[pyfunction]
fn compute_s(text: &str) -> PyResult<usize> {
    Ok(utc_core::interval::compute_s(&system(text)?))
}

#[pymodule]
fn utc_solver(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(solve_json, m)?)?;
    m.add_function(wrap_pyfunction!(check_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(entails, m)?)?;
    m.add_function(wrap_pyfunction!(compute_s, m)?)?;
    Ok(())
}
