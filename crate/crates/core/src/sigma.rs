//! Riemannian side of the story: coordinate metrics, Christoffel symbols,
//! geodesics, path energy, and the harmonic-map residual.
//!
//! Symbolic outputs are canonicalized, so tensor identities become decidable
//! whenever the entries are rational in the chart functions. The divergence
//! term of the harmonic residual is expanded through
//! (1/sqrt(D)) d(sqrt(D) h) = dh + h dD/(2D) with D = det g, which keeps
//! radicals out of the zero-test entirely.

use crate::expr::calculus::{compile_real, differentiate, substitute, CompiledExpr, EvalError};
use crate::expr::poly::{canonicalize, exprs_equal, CanonError};
use crate::expr::Expr;
use crate::forms::{Chart, FormsError, MatExpr, SmoothMap};
use crate::gauge::PathCurve;
use crate::mech::split_duration;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SigmaError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Canon(#[from] CanonError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("metric entries are not symmetric")]
    Asymmetric,
    #[error("dimension {got} where {want} was expected")]
    Dimension { got: usize, want: usize },
    #[error("step size must be positive and finite")]
    BadStep,
    #[error("duration must be non-negative and finite")]
    BadDuration,
    #[error("quadrature needs at least one sample point")]
    BadSamples,
    #[error("state became non-finite at step {0}")]
    NonFiniteState(usize),
    #[error("metric is singular at step {0}")]
    SingularAt(usize),
    #[error("energy needs a symbolic path")]
    SymbolicPathRequired,
}

/// Coordinate metric g_ij on a chart. Entries may involve the chart functions;
/// symmetry is checked exactly at construction, invertibility where needed.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    pub chart: Chart,
    pub g: MatExpr,
}

impl Metric {
    pub fn new(chart: Chart, entries: Vec<Vec<Expr>>) -> Result<Self, SigmaError> {
        let g = MatExpr::from_entries(entries)?;
        if g.m != chart.dim() {
            return Err(FormsError::SizeMismatch.into());
        }
        for row in &g.entries {
            for e in row {
                chart.check_expr(e, &["pi"])?;
            }
        }
        for i in 0..g.m {
            for j in (i + 1)..g.m {
                if !exprs_equal(&g.entries[i][j], &g.entries[j][i])? {
                    return Err(SigmaError::Asymmetric);
                }
            }
        }
        Ok(Metric { chart, g })
    }

    pub fn euclidean(chart: Chart) -> Self {
        let g = MatExpr::identity(chart.dim());
        Metric { chart, g }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }
}

/// Levi-Civita symbols, gamma[i][j][k] = Γ^i_{jk}
/// = (1/2) g^{il} (∂_j g_{kl} + ∂_k g_{jl} - ∂_l g_{jk}), canonicalized.
/// Every (j, k) slot is computed independently; symmetry in the lower pair is
/// a consequence, not an assumption.
pub fn christoffel(m: &Metric) -> Result<Vec<Vec<Vec<Expr>>>, SigmaError> {
    let d = m.dim();
    let ginv = m.g.inverse()?;
    let names = &m.chart.names;
    let half = Expr::ratio(1, 2);
    let mut out = vec![vec![vec![Expr::zero(); d]; d]; d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let mut terms = Vec::with_capacity(d);
                for l in 0..d {
                    let s = Expr::add(vec![
                        differentiate(&m.g.entries[k][l], &names[j]),
                        differentiate(&m.g.entries[j][l], &names[k]),
                        Expr::neg(differentiate(&m.g.entries[j][k], &names[l])),
                    ]);
                    terms.push(Expr::mul2(ginv.entries[i][l].clone(), s));
                }
                out[i][j][k] =
                    canonicalize(&Expr::mul2(half.clone(), Expr::add(terms)))?;
            }
        }
    }
    Ok(out)
}

// Γ^i_{jk} compiled over the chart, flattened as [i*d*d + j*d + k].
struct GeodesicField {
    d: usize,
    gamma: Vec<CompiledExpr>,
}

impl GeodesicField {
    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>, EvalError> {
        let d = self.d;
        let (x, v) = y.split_at(d);
        let mut out = vec![0.0; 2 * d];
        out[..d].copy_from_slice(v);
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                for k in j..d {
                    let g = self.gamma[i * d * d + j * d + k].eval(x)?;
                    let w = if j == k { 1.0 } else { 2.0 };
                    acc += w * g * v[j] * v[k];
                }
            }
            out[d + i] = -acc;
        }
        Ok(out)
    }
}

fn rk4_step(field: &GeodesicField, y: &[f64], h: f64) -> Result<Vec<f64>, EvalError> {
    let shift = |s: f64, k: &[f64]| -> Vec<f64> {
        y.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    let k1 = field.rhs(y)?;
    let k2 = field.rhs(&shift(h / 2.0, &k1))?;
    let k3 = field.rhs(&shift(h / 2.0, &k2))?;
    let k4 = field.rhs(&shift(h, &k3))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, &yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

// A pole hit while stepping means the trajectory ran into the singular locus
// of the metric; everything else non-finite is a plain blow-up.
fn step_error(e: EvalError, step: usize) -> SigmaError {
    match e {
        EvalError::DivisionByZero | EvalError::ZeroToNegativePower => SigmaError::SingularAt(step),
        EvalError::NonFinite => SigmaError::NonFiniteState(step),
        other => SigmaError::Eval(other),
    }
}

/// Fixed-step RK4 for x' = v, v'^i = -Γ^i_{jk}(x) v^j v^k. Rows are
/// (t, [x.., v..]) starting at t = 0; when `t_final` is not a whole number of
/// steps a final shorter step lands exactly on it.
pub fn geodesic_integrate(
    m: &Metric,
    x0: &[f64],
    v0: &[f64],
    t_final: f64,
    h: f64,
) -> Result<Vec<(f64, Vec<f64>)>, SigmaError> {
    let d = m.dim();
    if x0.len() != d {
        return Err(SigmaError::Dimension {
            got: x0.len(),
            want: d,
        });
    }
    if v0.len() != d {
        return Err(SigmaError::Dimension {
            got: v0.len(),
            want: d,
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(SigmaError::BadStep);
    }
    if !(t_final.is_finite() && t_final >= 0.0) {
        return Err(SigmaError::BadDuration);
    }
    let gamma = christoffel(m)?;
    let mut compiled = Vec::with_capacity(d * d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                compiled.push(compile_real(&gamma[i][j][k], &m.chart.names)?);
            }
        }
    }
    let field = GeodesicField { d, gamma: compiled };

    let (full, rem) = split_duration(t_final, h);
    let mut y: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let mut rows = Vec::with_capacity(full as usize + 2);
    rows.push((0.0, y.clone()));
    for step in 0..full {
        y = rk4_step(&field, &y, h).map_err(|e| step_error(e, step as usize))?;
        if y.iter().any(|c| !c.is_finite()) {
            return Err(SigmaError::NonFiniteState(step as usize));
        }
        rows.push(((step + 1) as f64 * h, y.clone()));
    }
    if rem > 0.0 {
        y = rk4_step(&field, &y, rem).map_err(|e| step_error(e, full as usize))?;
        if y.iter().any(|c| !c.is_finite()) {
            return Err(SigmaError::NonFiniteState(full as usize));
        }
        rows.push((t_final, y));
    }
    Ok(rows)
}

/// Energy ∫_0^1 g_ij(f(t)) f'^i(t) f'^j(t) dt by the composite midpoint rule
/// on `n` sample points. The path must be symbolic so the velocity exists;
/// note the parameter interval is fixed at [0, 1], so a constant-speed curve
/// of length L carries energy L^2.
pub fn energy(path: &PathCurve, m: &Metric, n: usize) -> Result<f64, SigmaError> {
    let PathCurve::Symbolic { chart, comps } = path else {
        return Err(SigmaError::SymbolicPathRequired);
    };
    if *chart != m.chart {
        return Err(FormsError::ChartMismatch.into());
    }
    if n == 0 {
        return Err(SigmaError::BadSamples);
    }
    let t = ["t".to_string()];
    let pos: Vec<CompiledExpr> = comps
        .iter()
        .map(|c| compile_real(c, &t))
        .collect::<Result<_, _>>()?;
    let vel: Vec<CompiledExpr> = comps
        .iter()
        .map(|c| compile_real(&differentiate(c, "t"), &t))
        .collect::<Result<_, _>>()?;
    let d = m.dim();
    let mut gc = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            gc.push(compile_real(&m.g.entries[i][j], &m.chart.names)?);
        }
    }
    let mut total = 0.0;
    for s in 0..n {
        let tk = [(s as f64 + 0.5) / n as f64];
        let x: Vec<f64> = pos
            .iter()
            .map(|c| c.eval(&tk))
            .collect::<Result<_, _>>()
            .map_err(|e| step_error(e, s))?;
        let v: Vec<f64> = vel
            .iter()
            .map(|c| c.eval(&tk))
            .collect::<Result<_, _>>()
            .map_err(|e| step_error(e, s))?;
        let mut q = 0.0;
        for i in 0..d {
            for j in 0..d {
                let gij = gc[i * d + j].eval(&x).map_err(|e| step_error(e, s))?;
                q += gij * v[i] * v[j];
            }
        }
        if !q.is_finite() {
            return Err(SigmaError::NonFiniteState(s));
        }
        total += q;
    }
    Ok(total / n as f64)
}

/// Tension field of f: (source, γ) → (target, g), one canonicalized expression
/// per target coordinate:
///
///   τ^i = (1/√D) ∂_a (√D γ^{ab} ∂_b f^i) + γ^{ab} Γ^i_{jk}(f) ∂_a f^j ∂_b f^k
///
/// with D = det γ. The divergence is expanded as ∂_a h^a + h^a ∂_a D / (2D),
/// which is the same field away from the singular locus and stays rational, so
/// vanishing is decidable. f is harmonic iff every component is zero.
pub fn harmonic_residual(
    f: &SmoothMap,
    src: &Metric,
    tgt: &Metric,
) -> Result<Vec<Expr>, SigmaError> {
    if f.source != src.chart || f.target != tgt.chart {
        return Err(FormsError::ChartMismatch.into());
    }
    let ds = src.dim();
    let dt = tgt.dim();
    let ginv = src.g.inverse()?;
    let det = canonicalize(&src.g.det()?)?;
    let bind = f.bindings();
    let gam = christoffel(tgt)?;
    let names = &src.chart.names;

    let mut residual = Vec::with_capacity(dt);
    for i in 0..dt {
        let mut hs = Vec::with_capacity(ds);
        for a in 0..ds {
            let parts = (0..ds)
                .map(|b| {
                    Expr::mul2(
                        ginv.entries[a][b].clone(),
                        differentiate(&f.comps[i], &names[b]),
                    )
                })
                .collect();
            hs.push(Expr::add(parts));
        }
        let mut terms = Vec::new();
        for a in 0..ds {
            terms.push(differentiate(&hs[a], &names[a]));
            terms.push(Expr::div(
                Expr::mul2(hs[a].clone(), differentiate(&det, &names[a])),
                Expr::mul2(Expr::int(2), det.clone()),
            ));
        }
        for a in 0..ds {
            for b in 0..ds {
                for j in 0..dt {
                    for k in 0..dt {
                        terms.push(Expr::mul(vec![
                            ginv.entries[a][b].clone(),
                            substitute(&gam[i][j][k], &bind),
                            differentiate(&f.comps[j], &names[a]),
                            differentiate(&f.comps[k], &names[b]),
                        ]));
                    }
                }
            }
        }
        residual.push(canonicalize(&Expr::add(terms))?);
    }
    Ok(residual)
}
