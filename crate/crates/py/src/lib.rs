//! Python bindings over the darboux core. Expressions cross the boundary as
//! strings through the exact parser and canonical printer; matrices cross as
//! nested lists, complex entries as Python complex numbers.

use std::str::FromStr;

use darboux::expr::calculus::differentiate;
use darboux::expr::parse::parse;
use darboux::expr::poly::{canonicalize, exprs_equal};
use darboux::expr::Expr;
use darboux::forms::{Chart, DiffForm, MatExpr};
use darboux::gauge::{self, Loop, PathCurve, TransportMethod};
use darboux::knots::{
    jones_at_level, parse_pd, skein_evaluate, writhe, Crossing, LinkDiagram, SkeinSpec,
};
use darboux::lie::{self, CMat, Complex64};
use darboux::mech::{flow_integrate, poisson, HamiltonianSystem};
use darboux::prequant::{prequant_op, quantum_condition_residual, PrequantConnection};
use darboux::sigma::{geodesic_integrate, Metric};
use darboux::symplin::{fmt_rational, parse_rational, symplectic_basis, QMatrix};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn val_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn expr(s: &str) -> PyResult<Expr> {
    parse(s).map_err(val_err)
}

fn chart(names: Vec<String>) -> PyResult<Chart> {
    Chart::new(names).map_err(val_err)
}

/// Canonical form of an expression: polynomial or reduced fraction.
#[pyfunction]
fn canonical(text: &str) -> PyResult<String> {
    Ok(canonicalize(&expr(text)?).map_err(val_err)?.to_string())
}

/// Exact equality in the polynomial/rational fragment.
#[pyfunction]
#[pyo3(name = "exprs_equal")]
fn exprs_equal_py(a: &str, b: &str) -> PyResult<bool> {
    exprs_equal(&expr(a)?, &expr(b)?).map_err(val_err)
}

/// Partial derivative, returned in canonical form.
#[pyfunction]
#[pyo3(name = "differentiate")]
fn differentiate_py(text: &str, var: &str) -> PyResult<String> {
    let d = differentiate(&expr(text)?, var);
    Ok(canonicalize(&d).map_err(val_err)?.to_string())
}

/// {f, g} on the standard 2n-chart q1..qn, p1..pn (q, p when n = 1).
#[pyfunction]
fn poisson_bracket(f: &str, g: &str, n: usize) -> PyResult<String> {
    Ok(poisson(&expr(f)?, &expr(g)?, n).map_err(val_err)?.to_string())
}

/// Prequantum operator Q(f) applied to a section psi.
#[pyfunction]
fn quantize(f: &str, n: usize, psi: &str) -> PyResult<String> {
    let conn = PrequantConnection::standard(n);
    Ok(prequant_op(&expr(f)?, &conn, &expr(psi)?)
        .map_err(val_err)?
        .to_string())
}

/// [Q(f), Q(g)] psi + i hbar Q({f, g}) psi; "0" when the condition holds.
#[pyfunction]
fn quantum_residual(f: &str, g: &str, n: usize, psi: &str) -> PyResult<String> {
    let conn = PrequantConnection::standard(n);
    Ok(
        quantum_condition_residual(&expr(f)?, &expr(g)?, &conn, &expr(psi)?)
            .map_err(val_err)?
            .to_string(),
    )
}

/// Exact normal form of an antisymmetric rational matrix given as strings
/// like "3/4". Returns (basis, kernel_dim, pairs) with B^T Omega B equal to
/// blockdiag(0_k, [[0, I], [-I, 0]]).
#[pyfunction]
#[pyo3(name = "symplectic_basis")]
fn symplectic_basis_py(
    rows: Vec<Vec<String>>,
) -> PyResult<(Vec<Vec<String>>, usize, usize)> {
    let mut parsed = Vec::with_capacity(rows.len());
    for row in &rows {
        let mut out = Vec::with_capacity(row.len());
        for s in row {
            out.push(
                parse_rational(s).ok_or_else(|| val_err(format!("not a rational: '{s}'")))?,
            );
        }
        parsed.push(out);
    }
    let omega = QMatrix::from_rows(parsed).map_err(val_err)?;
    let nf = symplectic_basis(&omega).map_err(val_err)?;
    let basis = (0..nf.basis.rows)
        .map(|i| {
            (0..nf.basis.cols)
                .map(|j| fmt_rational(&nf.basis[(i, j)]))
                .collect()
        })
        .collect();
    Ok((basis, nf.kernel_dim, nf.pairs))
}

/// RK4 rows (t, [q.., p..]) for the Hamiltonian flow of h.
#[pyfunction]
fn flow(
    hamiltonian: &str,
    n: usize,
    x0: Vec<f64>,
    t_final: f64,
    step: f64,
) -> PyResult<Vec<(f64, Vec<f64>)>> {
    let sys = HamiltonianSystem::new(n, expr(hamiltonian)?).map_err(val_err)?;
    flow_integrate(&sys, &x0, t_final, step).map_err(val_err)
}

fn to_cmat(m: Vec<Vec<Complex64>>) -> PyResult<CMat> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if rows == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(val_err("matrix rows must be nonempty and equal length"));
    }
    Ok(CMat::from_fn(rows, cols, |i, j| m[i][j]))
}

fn from_cmat(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Matrix exponential by scaling and squaring.
#[pyfunction]
#[pyo3(name = "exp_matrix")]
fn exp_matrix_py(x: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(from_cmat(&lie::exp_matrix(&to_cmat(x)?).map_err(val_err)?))
}

/// Commutator [x, y].
#[pyfunction]
#[pyo3(name = "ad")]
fn ad_py(x: Vec<Vec<Complex64>>, y: Vec<Vec<Complex64>>) -> PyResult<Vec<Vec<Complex64>>> {
    Ok(from_cmat(
        &lie::ad(&to_cmat(x)?, &to_cmat(y)?).map_err(val_err)?,
    ))
}

fn one_form(names: Vec<String>, comps: Vec<Vec<Vec<String>>>) -> PyResult<DiffForm> {
    let chart = chart(names)?;
    let mut mats = Vec::with_capacity(comps.len());
    for entries in comps {
        let mut rows = Vec::with_capacity(entries.len());
        for row in entries {
            rows.push(row.iter().map(|s| expr(s)).collect::<PyResult<Vec<_>>>()?);
        }
        mats.push(MatExpr::from_entries(rows).map_err(val_err)?);
    }
    DiffForm::one_form(chart, mats).map_err(val_err)
}

fn polyline_loop(names: Vec<String>, points: Vec<Vec<f64>>) -> PyResult<Loop> {
    let chart = chart(names)?;
    let path = PathCurve::polyline(chart, points).map_err(val_err)?;
    Loop::new(path).map_err(val_err)
}

/// Holonomy of a matrix one-form around a closed polyline. `comps` holds one
/// coefficient matrix of expression strings per chart variable.
#[pyfunction]
#[pyo3(name = "holonomy")]
fn holonomy_py(
    chart_names: Vec<String>,
    comps: Vec<Vec<Vec<String>>>,
    loop_points: Vec<Vec<f64>>,
    method: &str,
    steps: usize,
) -> PyResult<Vec<Vec<Complex64>>> {
    let a = one_form(chart_names.clone(), comps)?;
    let lp = polyline_loop(chart_names, loop_points)?;
    let m = TransportMethod::from_str(method).map_err(val_err)?;
    Ok(from_cmat(&gauge::holonomy(&a, &lp, m, steps).map_err(val_err)?))
}

/// tr P exp(i oint A) around a closed polyline.
#[pyfunction]
#[pyo3(name = "wilson_loop")]
fn wilson_loop_py(
    chart_names: Vec<String>,
    comps: Vec<Vec<Vec<String>>>,
    loop_points: Vec<Vec<f64>>,
    method: &str,
    steps: usize,
) -> PyResult<Complex64> {
    let a = one_form(chart_names.clone(), comps)?;
    let lp = polyline_loop(chart_names, loop_points)?;
    let m = TransportMethod::from_str(method).map_err(val_err)?;
    gauge::wilson_loop(&a, &lp, m, steps).map_err(val_err)
}

/// RK4 rows (t, [x.., v..]) of the geodesic flow for the metric `g`, whose
/// entries are expression strings in the chart variables.
#[pyfunction]
fn geodesic(
    chart_names: Vec<String>,
    g: Vec<Vec<String>>,
    x0: Vec<f64>,
    v0: Vec<f64>,
    t_final: f64,
    step: f64,
) -> PyResult<Vec<(f64, Vec<f64>)>> {
    let chart = chart(chart_names)?;
    let entries = g
        .iter()
        .map(|row| row.iter().map(|s| expr(s)).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    let metric = Metric::new(chart, entries).map_err(val_err)?;
    geodesic_integrate(&metric, &x0, &v0, t_final, step).map_err(val_err)
}

/// An oriented link diagram in PD form. Crossing arcs read counterclockwise
/// from the incoming under-strand.
#[pyclass(name = "LinkDiagram")]
struct Diagram {
    inner: LinkDiagram,
}

#[pymethods]
impl Diagram {
    #[new]
    #[pyo3(signature = (crossings, free_loops = 0))]
    fn new(crossings: Vec<(i8, [usize; 4])>, free_loops: usize) -> PyResult<Self> {
        let crossings = crossings
            .into_iter()
            .map(|(sign, arcs)| Crossing { sign, arcs })
            .collect();
        Ok(Diagram {
            inner: LinkDiagram::new(crossings, free_loops).map_err(val_err)?,
        })
    }

    /// Parse the JSON file format used by the command line.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Diagram {
            inner: parse_pd(text).map_err(val_err)?,
        })
    }

    fn writhe(&self) -> i64 {
        writhe(&self.inner)
    }

    fn components(&self) -> usize {
        self.inner.total_components()
    }

    /// "generic", "conway", "jones", or "homfly", printed exactly.
    fn invariant(&self, spec: &str) -> PyResult<String> {
        let spec = SkeinSpec::from_str(spec).map_err(val_err)?;
        Ok(skein_evaluate(&self.inner, spec).map_err(val_err)?.to_string())
    }

    /// Jones value at the level-k root s = exp(i pi / (k + 2)).
    fn jones_at_level(&self, k: u32) -> PyResult<Complex64> {
        jones_at_level(&self.inner, k).map_err(val_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "LinkDiagram({} crossings, {} components, writhe {})",
            self.inner.crossings.len(),
            self.inner.total_components(),
            writhe(&self.inner)
        )
    }
}

#[pymodule]
fn darboux_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Diagram>()?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(exprs_equal_py, m)?)?;
    m.add_function(wrap_pyfunction!(differentiate_py, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_bracket, m)?)?;
    m.add_function(wrap_pyfunction!(quantize, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_residual, m)?)?;
    m.add_function(wrap_pyfunction!(symplectic_basis_py, m)?)?;
    m.add_function(wrap_pyfunction!(flow, m)?)?;
    m.add_function(wrap_pyfunction!(exp_matrix_py, m)?)?;
    m.add_function(wrap_pyfunction!(ad_py, m)?)?;
    m.add_function(wrap_pyfunction!(holonomy_py, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_loop_py, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    Ok(())
}
