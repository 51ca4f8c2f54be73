use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use nalgebra::DMatrix;
use stargen::moyal::star_product;
use stargen::spectral::{self, HamiltonianSpec};
use stargen::wigner::WindowedTransform;
use stargen::{special, verify, Error, HbarContext, PhaseField, PhaseGrid, SpatialGrid, WaveField, C64};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn phase_grid(x_min: f64, x_max: f64, n: usize, hbar: f64) -> Result<PhaseGrid, Error> {
    PhaseGrid::from_x_axis(SpatialGrid::new(x_min, x_max, n)?, HbarContext::new(hbar)?)
}

fn to_rows(f: &PhaseField) -> Vec<Vec<C64>> {
    f.values().chunks(f.grid().np()).map(|r| r.to_vec()).collect()
}

fn from_rows(grid: PhaseGrid, rows: Vec<Vec<C64>>) -> Result<PhaseField, Error> {
    if rows.len() != grid.nx() || rows.iter().any(|r| r.len() != grid.np()) {
        return Err(Error::Shape(format!("expected a {}x{} array", grid.nx(), grid.np())));
    }
    PhaseField::new(grid, rows.concat())
}

/// Physicists' Hermite polynomial H_k(x).
#[pyfunction]
fn hermite_poly(k: usize, x: f64) -> f64 {
    special::hermite_poly(k, x)
}

/// Generalized Laguerre polynomial L_j^k(x), x >= 0.
#[pyfunction]
fn laguerre_poly(j: usize, k: usize, x: f64) -> PyResult<f64> {
    special::laguerre_poly(j, k, x).map_err(py_err)
}

/// Normalized Hermite function psi_k sampled on [x_min, x_max) with n points.
#[pyfunction]
#[pyo3(signature = (k, x_min, x_max, n, hbar = 1.0))]
fn hermite_function(k: usize, x_min: f64, x_max: f64, n: usize, hbar: f64) -> PyResult<Vec<f64>> {
    let f = special::hermite_function(k, SpatialGrid::new(x_min, x_max, n).map_err(py_err)?, HbarContext::new(hbar).map_err(py_err)?)
        .map_err(py_err)?;
    Ok(f.values().iter().map(|v| v.re).collect())
}

/// Lowest eigenvalues of a Hamiltonian given as JSON, e.g.
/// `{"kind": "quadratic_1d", "coeffs": [0, 0, 0, 0.5, 0, 0.5]}`.
#[pyfunction]
#[pyo3(signature = (hamiltonian, x_min, x_max, n, count, hbar = 1.0))]
fn eigenvalues(hamiltonian: &str, x_min: f64, x_max: f64, n: usize, count: usize, hbar: f64) -> PyResult<Vec<f64>> {
    let h: HamiltonianSpec = serde_json::from_str(hamiltonian).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let g = SpatialGrid::new(x_min, x_max, n).map_err(py_err)?;
    let pairs = spectral::eigensolve(&h, g, HbarContext::new(hbar).map_err(py_err)?, count).map_err(py_err)?;
    Ok(pairs.iter().map(|p| p.lambda).collect())
}

/// W_phi psi with a Hermite window; rows are x, columns p.
#[pyfunction]
#[pyo3(signature = (psi, window, x_min, x_max, hbar = 1.0))]
fn cross_wigner(psi: Vec<C64>, window: usize, x_min: f64, x_max: f64, hbar: f64) -> PyResult<Vec<Vec<C64>>> {
    let g = phase_grid(x_min, x_max, psi.len(), hbar).map_err(py_err)?;
    let t = WindowedTransform::hermite(window, g).map_err(py_err)?;
    let f = WaveField::new(*g.x_axis(), psi).map_err(py_err)?;
    Ok(to_rows(&t.apply(&f).map_err(py_err)?))
}

/// Moyal product of two n x n phase-space arrays on the DFT grid over [x_min, x_max).
#[pyfunction]
#[pyo3(signature = (a, b, x_min, x_max, hbar = 1.0))]
fn star(a: Vec<Vec<C64>>, b: Vec<Vec<C64>>, x_min: f64, x_max: f64, hbar: f64) -> PyResult<Vec<Vec<C64>>> {
    let g = phase_grid(x_min, x_max, a.len(), hbar).map_err(py_err)?;
    let fa = from_rows(g, a).map_err(py_err)?;
    let fb = from_rows(g, b).map_err(py_err)?;
    Ok(to_rows(&star_product(&fa, &fb).map_err(py_err)?))
}

fn matrix(m: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| m[i][j]))
}

/// Williamson normal form: returns (S, omegas) with M = S^T diag(omegas, omegas) S.
#[pyfunction]
fn williamson(m: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let dec = spectral::williamson(&matrix(m)?).map_err(py_err)?;
    let s = (0..dec.s.nrows()).map(|i| dec.s.row(i).iter().copied().collect()).collect();
    Ok((s, dec.omegas))
}

#[pyfunction]
#[pyo3(signature = (m, indices, hbar = 1.0))]
fn quadratic_spectrum(m: Vec<Vec<f64>>, indices: Vec<Vec<usize>>, hbar: f64) -> PyResult<Vec<f64>> {
    spectral::quadratic_spectrum(&matrix(m)?, &indices, HbarContext::new(hbar).map_err(py_err)?).map_err(py_err)
}

/// Runs a verification suite; returns (name, measured, tolerance, passed) tuples.
#[pyfunction]
fn run_verify(suite: &str) -> PyResult<Vec<(String, f64, f64, bool)>> {
    let checks = verify::run_suite(suite).map_err(py_err)?;
    Ok(checks
        .iter()
        .map(|c| (format!("{}/{}", c.suite, c.name), c.measured, c.tolerance, c.passed()))
        .collect())
}

#[pymodule]
fn stargen_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(hermite_poly, m)?)?;
    m.add_function(wrap_pyfunction!(laguerre_poly, m)?)?;
    m.add_function(wrap_pyfunction!(hermite_function, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(cross_wigner, m)?)?;
    m.add_function(wrap_pyfunction!(star, m)?)?;
    m.add_function(wrap_pyfunction!(williamson, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
