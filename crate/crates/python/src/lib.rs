use std::path::Path;
use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use l2mult_core::character_table::character_table as table;
use l2mult_core::equivariant::quotient_complex;
use l2mult_core::finite_group::parse_group_spec;
use l2mult_core::group_ring::GroupRingMatrix;
use l2mult_core::quotient::QuotientMap;
use l2mult_core::runner::{farber_diagnostic, rel_farber_diagnostic, run, Experiment, ExperimentConfig};
use l2mult_core::spectral::{fk_det, spectral_measure as measure, FiniteRep};
use l2mult_core::words::BuiltinGroup;

fn py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn resolve(config_json: &str, base_dir: &str) -> PyResult<Experiment> {
    let cfg = ExperimentConfig::from_json_str(config_json).map_err(py_err)?;
    Experiment::resolve(cfg, Path::new(base_dir)).map_err(py_err)
}

/// Character table of a finite group spec such as `dihedral:8`, as JSON.
#[pyfunction]
fn character_table(spec: &str) -> PyResult<String> {
    let g = Arc::new(parse_group_spec(spec).map_err(py_err)?);
    Ok(table(&g).map_err(py_err)?.to_json().to_string())
}

/// Spectral measure of a self-adjoint matrix over the free group on the
/// quotient's generators, in the quotient's regular representation, as JSON.
#[pyfunction]
fn spectral_measure(a: &str, quotient: &str) -> PyResult<String> {
    let q = Arc::new(parse_group_spec(quotient).map_err(py_err)?);
    let free = BuiltinGroup::free(q.generators().len());
    let map = QuotientMap::new(free.clone(), q.clone(), q.generators().to_vec()).map_err(py_err)?;
    let a = map.push_matrix(&GroupRingMatrix::parse(&free, a).map_err(py_err)?);
    let mu = measure(&a, &FiniteRep::regular(&q)).map_err(py_err)?;
    Ok(serde_json::json!({"measure": mu, "fk_det": fk_det(&mu)}).to_string())
}

/// Runs an experiment configuration and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (config_json, base_dir = ".", levels = None, parallel = None))]
fn run_experiment(config_json: &str, base_dir: &str, levels: Option<usize>, parallel: Option<usize>) -> PyResult<String> {
    let mut exp = resolve(config_json, base_dir)?;
    if let Some(n) = levels {
        exp.truncate(n);
    }
    Ok(run(&exp, parallel).map_err(py_err)?.to_json_string())
}

/// Farber and relative Farber diagnostics of a configuration, as JSON.
#[pyfunction]
#[pyo3(signature = (config_json, base_dir = "."))]
fn farber(config_json: &str, base_dir: &str) -> PyResult<String> {
    let exp = resolve(config_json, base_dir)?;
    let rows = farber_diagnostic(&exp.chain, &exp.probes);
    let rel = rel_farber_diagnostic(&exp.chain, &exp.h, &exp.probes, exp.config.limits.infinite_centralizers)
        .map_err(py_err)?;
    Ok(serde_json::json!({"farber": rows, "rel_farber": rel}).to_string())
}

/// Boundary `∂_p` of the quotient complex at one level, as `row,col,value` CSV.
#[pyfunction]
#[pyo3(signature = (config_json, level, p, base_dir = "."))]
fn boundary_csv(config_json: &str, level: usize, p: usize, base_dir: &str) -> PyResult<String> {
    let exp = resolve(config_json, base_dir)?;
    let lvl = exp.chain.levels().get(level).ok_or_else(|| py_err(format!("no level {level}")))?;
    let qc = quotient_complex(&exp.complex, lvl, &exp.h).map_err(py_err)?;
    Ok(qc.boundary_csv(p))
}

#[pymodule]
fn l2mult(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(character_table, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_measure, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(farber, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_csv, m)?)?;
    Ok(())
}
