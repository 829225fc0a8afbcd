//! Parallel transport, holonomy, and Wilson loops for matrix connections on
//! trivial bundles over coordinate charts.
//!
//! The transport ODE is g' = -Gamma(t) g with Gamma(t) = sum_mu A_mu(gamma(t))
//! gammadot^mu(t); holonomy starts from the identity, and the Wilson loop is
//! the trace of the same solver run on -i Gamma. Connection entries are
//! compiled once per transport, so step counts of 10^4 stay cheap.

use crate::expr::calculus::{
    compile_complex, compile_real, differentiate, substitute, CompiledComplex, CompiledExpr,
    EvalError,
};
use crate::expr::poly::canonicalize;
use crate::expr::Expr;
use crate::forms::{Chart, DiffForm, FormsError, MatExpr, VectorField};
use crate::lie::{exp_matrix, CMat, LieError};
use num_complex::Complex64;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GaugeError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("symbolic path components may only mention the parameter 't'")]
    BadParameter(String),
    #[error("polyline needs at least two points, all finite, all of chart dimension")]
    BadPolyline,
    #[error("path endpoints differ; not a loop")]
    NotClosed,
    #[error("step count must be at least 1")]
    BadSteps,
    #[error("initial frame is singular")]
    SingularInitial,
    #[error("transported frame became non-finite at step {0}")]
    NonFiniteState(usize),
    #[error("section length does not match the connection size")]
    SectionShape,
}

/// Path in a chart: coordinate expressions of a parameter t in [0, 1], or a
/// polyline visited at uniform parameter speed.
#[derive(Clone, Debug)]
pub enum PathCurve {
    Symbolic { chart: Chart, comps: Vec<Expr> },
    Polyline { chart: Chart, points: Vec<Vec<f64>> },
}

impl PathCurve {
    pub fn symbolic(chart: Chart, comps: Vec<Expr>) -> Result<Self, GaugeError> {
        if comps.len() != chart.dim() {
            return Err(FormsError::SizeMismatch.into());
        }
        for c in &comps {
            for v in c.variables() {
                if v != "t" && v != "pi" {
                    return Err(GaugeError::BadParameter(v));
                }
            }
        }
        Ok(PathCurve::Symbolic { chart, comps })
    }

    pub fn polyline(chart: Chart, points: Vec<Vec<f64>>) -> Result<Self, GaugeError> {
        if points.len() < 2
            || points
                .iter()
                .any(|p| p.len() != chart.dim() || p.iter().any(|v| !v.is_finite()))
        {
            return Err(GaugeError::BadPolyline);
        }
        Ok(PathCurve::Polyline { chart, points })
    }

    pub fn chart(&self) -> &Chart {
        match self {
            PathCurve::Symbolic { chart, .. } => chart,
            PathCurve::Polyline { chart, .. } => chart,
        }
    }

    /// Same trace, opposite orientation.
    pub fn reversed(&self) -> PathCurve {
        match self {
            PathCurve::Symbolic { chart, comps } => {
                let mut b = HashMap::new();
                b.insert(
                    "t".to_string(),
                    Expr::add2(Expr::one(), Expr::neg(Expr::Var("t".to_string()))),
                );
                PathCurve::Symbolic {
                    chart: chart.clone(),
                    comps: comps.iter().map(|c| substitute(c, &b)).collect(),
                }
            }
            PathCurve::Polyline { chart, points } => {
                let mut rev = points.clone();
                rev.reverse();
                PathCurve::Polyline {
                    chart: chart.clone(),
                    points: rev,
                }
            }
        }
    }

    pub fn point_at(&self, t: f64) -> Result<Vec<f64>, GaugeError> {
        match self {
            PathCurve::Symbolic { comps, .. } => {
                let pos = comps
                    .iter()
                    .map(|c| compile_real(c, &["t".to_string()]))
                    .collect::<Result<Vec<_>, _>>()?;
                pos.iter().map(|c| Ok(c.eval(&[t])?)).collect()
            }
            PathCurve::Polyline { points, .. } => {
                let (j, frac) = polyline_segment(points.len(), t);
                Ok(points[j]
                    .iter()
                    .zip(&points[j + 1])
                    .map(|(a, b)| a + frac * (b - a))
                    .collect())
            }
        }
    }
}

/// Segment index and fractional position for a polyline of `len` points at
/// parameter t; t outside [0, 1] clamps to the ends.
fn polyline_segment(len: usize, t: f64) -> (usize, f64) {
    let segs = len - 1;
    let u = (t.clamp(0.0, 1.0)) * segs as f64;
    let j = (u.floor() as usize).min(segs - 1);
    (j, u - j as f64)
}

/// Closed path: endpoints agree within 1e-12 in every coordinate.
#[derive(Clone, Debug)]
pub struct Loop(PathCurve);

impl Loop {
    pub fn new(path: PathCurve) -> Result<Self, GaugeError> {
        let a = path.point_at(0.0)?;
        let b = path.point_at(1.0)?;
        if a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-12) {
            return Err(GaugeError::NotClosed);
        }
        Ok(Loop(path))
    }

    pub fn path(&self) -> &PathCurve {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportMethod {
    Rk4,
    /// Product of stepwise exponentials exp(-Gamma(t_mid) dt), later factors
    /// multiplying from the left.
    ProdExp,
}

impl std::str::FromStr for TransportMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rk4" => Ok(TransportMethod::Rk4),
            "prodexp" => Ok(TransportMethod::ProdExp),
            other => Err(format!("unknown transport method '{other}'")),
        }
    }
}

/// Connection and path compiled against each other: everything needed to
/// sample Gamma(t) without touching the symbolic layer again.
struct Integrand {
    m: usize,
    /// entries[mu][i][j], one compiled coefficient per coordinate.
    entries: Vec<Vec<Vec<CompiledComplex>>>,
    path: CompiledPath,
}

enum CompiledPath {
    Symbolic {
        pos: Vec<CompiledExpr>,
        vel: Vec<CompiledExpr>,
    },
    Polyline {
        points: Vec<Vec<f64>>,
    },
}

impl Integrand {
    fn new(a: &DiffForm, path: &PathCurve) -> Result<Self, GaugeError> {
        if a.degree != 1 {
            return Err(FormsError::DegreeMismatch.into());
        }
        if a.chart != *path.chart() {
            return Err(FormsError::ChartMismatch.into());
        }
        let names = &a.chart.names;
        let entries = a
            .one_form_components()
            .iter()
            .map(|mat| {
                mat.entries
                    .iter()
                    .map(|row| row.iter().map(|e| compile_complex(e, names)).collect())
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let compiled_path = match path {
            PathCurve::Symbolic { comps, .. } => {
                let t = ["t".to_string()];
                let pos = comps
                    .iter()
                    .map(|c| compile_real(c, &t))
                    .collect::<Result<Vec<_>, _>>()?;
                let vel = comps
                    .iter()
                    .map(|c| compile_real(&differentiate(c, "t"), &t))
                    .collect::<Result<Vec<_>, _>>()?;
                CompiledPath::Symbolic { pos, vel }
            }
            PathCurve::Polyline { points, .. } => CompiledPath::Polyline {
                points: points.clone(),
            },
        };
        Ok(Integrand {
            m: a.m,
            entries,
            path: compiled_path,
        })
    }

    /// Position and velocity at parameter t. `seg` pins a polyline segment:
    /// an RK4 stage landing exactly on a corner must read the velocity of
    /// the edge being integrated, not the edge the corner begins.
    fn position_velocity(
        &self,
        t: f64,
        seg: Option<usize>,
    ) -> Result<(Vec<f64>, Vec<f64>), EvalError> {
        match &self.path {
            CompiledPath::Symbolic { pos, vel } => {
                let at = [t];
                let p = pos.iter().map(|c| c.eval(&at)).collect::<Result<_, _>>()?;
                let v = vel.iter().map(|c| c.eval(&at)).collect::<Result<_, _>>()?;
                Ok((p, v))
            }
            CompiledPath::Polyline { points } => {
                let segs = (points.len() - 1) as f64;
                let (j, frac) = match seg {
                    Some(j) => (j, (t * segs - j as f64).clamp(0.0, 1.0)),
                    None => polyline_segment(points.len(), t),
                };
                let p = points[j]
                    .iter()
                    .zip(&points[j + 1])
                    .map(|(a, b)| a + frac * (b - a))
                    .collect();
                let v = points[j]
                    .iter()
                    .zip(&points[j + 1])
                    .map(|(a, b)| (b - a) * segs)
                    .collect();
                Ok((p, v))
            }
        }
    }

    /// Gamma(t) = sum_mu A_mu(gamma(t)) gammadot^mu(t), times `factor`.
    fn gamma_at(&self, t: f64, factor: Complex64, seg: Option<usize>) -> Result<CMat, EvalError> {
        let (pos, vel) = self.position_velocity(t, seg)?;
        let vals: Vec<Complex64> = pos.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        let mut out = CMat::zeros(self.m, self.m);
        for (mu, speed) in vel.iter().enumerate() {
            if *speed == 0.0 {
                continue;
            }
            for i in 0..self.m {
                for j in 0..self.m {
                    out[(i, j)] += self.entries[mu][i][j].eval(&vals)? * *speed * factor;
                }
            }
        }
        Ok(out)
    }

    /// Parameter intervals on which the integrand is smooth: one for a
    /// symbolic curve, one per polyline edge. A corner inside an RK4 step
    /// would cost an order of accuracy, so steps never straddle one.
    fn smooth_pieces(&self) -> usize {
        match &self.path {
            CompiledPath::Symbolic { .. } => 1,
            CompiledPath::Polyline { points } => points.len() - 1,
        }
    }
}

fn finite(m: &CMat) -> bool {
    m.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Gamma(t) for a connection along a path, the coefficient in g' = -Gamma g.
pub fn transport_coefficient(
    a: &DiffForm,
    path: &PathCurve,
    t: f64,
) -> Result<CMat, GaugeError> {
    let integrand = Integrand::new(a, path)?;
    Ok(integrand.gamma_at(t, Complex64::new(1.0, 0.0), None)?)
}

fn transport_scaled(
    a: &DiffForm,
    path: &PathCurve,
    g0: &CMat,
    method: TransportMethod,
    n: usize,
    factor: Complex64,
) -> Result<CMat, GaugeError> {
    if n < 1 {
        return Err(GaugeError::BadSteps);
    }
    let integrand = Integrand::new(a, path)?;
    if g0.nrows() != integrand.m || g0.ncols() != integrand.m {
        return Err(LieError::ShapeMismatch.into());
    }
    if g0.clone().determinant().norm() <= 1e-12 {
        return Err(GaugeError::SingularInitial);
    }

    let pieces = integrand.smooth_pieces();
    let base = n / pieces;
    let extra = n % pieces;
    let mut g = g0.clone();
    let mut step_no = 0usize;
    for piece in 0..pieces {
        let seg = match &integrand.path {
            CompiledPath::Polyline { .. } => Some(piece),
            CompiledPath::Symbolic { .. } => None,
        };
        let t0 = piece as f64 / pieces as f64;
        let t1 = (piece + 1) as f64 / pieces as f64;
        let steps = (base + usize::from(piece < extra)).max(1);
        let h = (t1 - t0) / steps as f64;
        for k in 0..steps {
            step_no += 1;
            let ta = t0 + k as f64 * h;
            g = match method {
                TransportMethod::Rk4 => {
                    let f = |t: f64, y: &CMat| -> Result<CMat, EvalError> {
                        Ok(-(integrand.gamma_at(t, factor, seg)?) * y)
                    };
                    rk4_matrix_step(&f, ta, &g, h)
                        .map_err(|_| GaugeError::NonFiniteState(step_no))?
                }
                TransportMethod::ProdExp => {
                    let gam = integrand
                        .gamma_at(ta + 0.5 * h, factor, seg)
                        .map_err(|_| GaugeError::NonFiniteState(step_no))?;
                    exp_matrix(&gam.map(|c| -c * h))? * g
                }
            };
            if !finite(&g) {
                return Err(GaugeError::NonFiniteState(step_no));
            }
        }
    }
    Ok(g)
}

fn rk4_matrix_step(
    f: &dyn Fn(f64, &CMat) -> Result<CMat, EvalError>,
    t: f64,
    y: &CMat,
    h: f64,
) -> Result<CMat, EvalError> {
    let half = 0.5 * h;
    let k1 = f(t, y)?;
    let k2 = f(t + half, &(y + k1.map(|c| c * half)))?;
    let k3 = f(t + half, &(y + k2.map(|c| c * half)))?;
    let k4 = f(t + h, &(y + k3.map(|c| c * h)))?;
    let incr = (k1 + k2.map(|c| c * 2.0) + k3.map(|c| c * 2.0) + k4).map(|c| c * (h / 6.0));
    Ok(y + incr)
}

/// Approximate solution at parameter 1 of g' = -Gamma(t) g, g(0) = g0.
pub fn parallel_transport(
    a: &DiffForm,
    path: &PathCurve,
    g0: &CMat,
    method: TransportMethod,
    n: usize,
) -> Result<CMat, GaugeError> {
    transport_scaled(a, path, g0, method, n, Complex64::new(1.0, 0.0))
}

/// Parallel transport around a loop starting from the identity.
pub fn holonomy(
    a: &DiffForm,
    lp: &Loop,
    method: TransportMethod,
    n: usize,
) -> Result<CMat, GaugeError> {
    let m = a.m;
    parallel_transport(a, lp.path(), &CMat::identity(m, m), method, n)
}

/// tr P exp(i oint A) in the fundamental representation: the transport ODE
/// run with integrand -i Gamma, then traced.
pub fn wilson_loop(
    a: &DiffForm,
    lp: &Loop,
    method: TransportMethod,
    n: usize,
) -> Result<Complex64, GaugeError> {
    let m = a.m;
    let g = transport_scaled(
        a,
        lp.path(),
        &CMat::identity(m, m),
        method,
        n,
        Complex64::new(0.0, -1.0),
    )?;
    Ok(g.diagonal().iter().copied().sum())
}

/// nabla_Y s = ds(Y) + A(Y) s, componentwise and canonicalized.
pub fn covariant_derivative_section(
    s: &[Expr],
    y: &VectorField,
    a: &DiffForm,
) -> Result<Vec<Expr>, GaugeError> {
    if a.degree != 1 {
        return Err(FormsError::DegreeMismatch.into());
    }
    if a.chart != y.chart {
        return Err(FormsError::ChartMismatch.into());
    }
    if s.len() != a.m {
        return Err(GaugeError::SectionShape);
    }
    let a_of_y = one_form_on_field(a, y)?;
    let mut out = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        let mut terms = vec![y.apply(&s[i])];
        for (j, sj) in s.iter().enumerate() {
            terms.push(Expr::mul2(a_of_y.entries[i][j].clone(), sj.clone()));
        }
        out.push(canonicalize(&Expr::add(terms)).map_err(FormsError::from)?);
    }
    Ok(out)
}

/// A(Y) for a matrix one-form: sum_mu A_mu Y^mu.
pub fn one_form_on_field(a: &DiffForm, y: &VectorField) -> Result<MatExpr, GaugeError> {
    if a.degree != 1 {
        return Err(FormsError::DegreeMismatch.into());
    }
    if a.chart != y.chart {
        return Err(FormsError::ChartMismatch.into());
    }
    let mut out = MatExpr::zero(a.m);
    for (mu, mat) in a.one_form_components().iter().enumerate() {
        out = out.add(&mat.scale(&y.comps[mu]))?;
    }
    Ok(out)
}

/// F(X, Y) for a matrix two-form: sum_{i<j} F_ij (X^i Y^j - X^j Y^i).
pub fn two_form_on_fields(
    f: &DiffForm,
    x: &VectorField,
    y: &VectorField,
) -> Result<MatExpr, GaugeError> {
    if f.degree != 2 {
        return Err(FormsError::DegreeMismatch.into());
    }
    if f.chart != x.chart || f.chart != y.chart {
        return Err(FormsError::ChartMismatch.into());
    }
    let mut out = MatExpr::zero(f.m);
    for (idx, mat) in &f.coeffs {
        let (i, j) = (idx[0], idx[1]);
        let coef = Expr::add2(
            Expr::mul2(x.comps[i].clone(), y.comps[j].clone()),
            Expr::neg(Expr::mul2(x.comps[j].clone(), y.comps[i].clone())),
        );
        out = out.add(&mat.scale(&coef))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;
    use crate::forms::{curvature, conjugate_form};
    use crate::lie::{frob_norm, su2_u1, su2_u2, su2_u3};
    use crate::mech::commutator;

    fn xy_chart() -> Chart {
        Chart::new(vec!["x".to_string(), "y".to_string()]).unwrap()
    }

    fn scaled(m: &CMat, e: Expr) -> Vec<Vec<Expr>> {
        m.row_iter()
            .map(|row| {
                row.iter()
                    .map(|c| {
                        let re = crate::GaussQ::from_ratio(
                            (c.re * 2.0) as i64,
                            2,
                        );
                        let im = crate::GaussQ::from_ratio((c.im * 2.0) as i64, 2);
                        let unit = Expr::add2(
                            Expr::Const(re),
                            Expr::mul2(Expr::Const(crate::GaussQ::i()), Expr::Const(im)),
                        );
                        Expr::mul2(unit, e.clone())
                    })
                    .collect()
            })
            .collect()
    }

    /// su(2) generator times a scalar coefficient, as a MatExpr.
    fn gen_times(u: &CMat, coeff: &str) -> MatExpr {
        MatExpr::from_entries(scaled(u, parse(coeff).unwrap())).unwrap()
    }

    fn unit_square() -> Loop {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0],
        ];
        Loop::new(PathCurve::polyline(xy_chart(), pts).unwrap()).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        // A = 0
        let zero = DiffForm::zero(xy_chart(), 1, 2);
        let diag = PathCurve::symbolic(
            xy_chart(),
            vec![parse("t").unwrap(), parse("t").unwrap()],
        )
        .unwrap();
        let gam = transport_coefficient(&zero, &diag, 0.5).unwrap();
        assert!(frob_norm(&gam) < 1e-15);

        // A = (1/2) u3 dx along (t, 0): constant coefficient
        let a = DiffForm::one_form(
            xy_chart(),
            vec![gen_times(&su2_u3(), "1/2"), MatExpr::zero(2)],
        )
        .unwrap();
        let horiz = PathCurve::symbolic(
            xy_chart(),
            vec![parse("t").unwrap(), Expr::zero()],
        )
        .unwrap();
        for t in [0.0, 0.3, 1.0] {
            let gam = transport_coefficient(&a, &horiz, t).unwrap();
            assert!(frob_norm(&(gam - su2_u3().map(|c| c * 0.5))) < 1e-14);
        }

        // A = x u1 dy along (t, t): coefficient t u1
        let a = DiffForm::one_form(
            xy_chart(),
            vec![MatExpr::zero(2), gen_times(&su2_u1(), "x")],
        )
        .unwrap();
        let gam = transport_coefficient(&a, &diag, 0.7).unwrap();
        assert!(frob_norm(&(gam - su2_u1().map(|c| c * 0.7))) < 1e-14);
    }

    #[test]
    fn transport_of_zero_connection_is_identity_on_g0() {
        let zero = DiffForm::zero(xy_chart(), 1, 2);
        let path = PathCurve::polyline(xy_chart(), vec![vec![0.0, 0.0], vec![0.4, 0.9]]).unwrap();
        let g0 = su2_u1().map(|c| c * 0.3) + CMat::identity(2, 2);
        for method in [TransportMethod::Rk4, TransportMethod::ProdExp] {
            let g = parallel_transport(&zero, &path, &g0, method, 50).unwrap();
            assert!(frob_norm(&(g - g0.clone())) < 1e-12);
        }
    }

    #[test]
    fn abelian_transport_matches_closed_form() {
        // A = u3 dx over an x-interval of length L: g(1) = exp(-L u3) g0
        let chart = Chart::new(vec!["x".to_string()]).unwrap();
        let a = DiffForm::one_form(chart.clone(), vec![gen_times(&su2_u3(), "1")]).unwrap();
        let l = 0.8;
        let path = PathCurve::polyline(chart, vec![vec![0.0], vec![l]]).unwrap();
        let want = exp_matrix(&su2_u3().map(|c| -c * l)).unwrap();
        for method in [TransportMethod::Rk4, TransportMethod::ProdExp] {
            let g = parallel_transport(&a, &path, &CMat::identity(2, 2), method, 2000).unwrap();
            assert!(frob_norm(&(g - want.clone())) < 1e-7, "{method:?}");
        }
    }

    #[test]
    fn methods_agree_on_polynomial_connection() {
        let a = DiffForm::one_form(
            xy_chart(),
            vec![
                gen_times(&su2_u1(), "x + 2*y").add(&gen_times(&su2_u3(), "y^2")).unwrap(),
                gen_times(&su2_u2(), "x^2 - y").add(&gen_times(&su2_u1(), "1/3")).unwrap(),
            ],
        )
        .unwrap();
        let path = PathCurve::symbolic(
            xy_chart(),
            vec![parse("t^2").unwrap(), parse("t - t^3/2").unwrap()],
        )
        .unwrap();
        let g0 = CMat::identity(2, 2);
        let rk = parallel_transport(&a, &path, &g0, TransportMethod::Rk4, 10_000).unwrap();
        let pe = parallel_transport(&a, &path, &g0, TransportMethod::ProdExp, 10_000).unwrap();
        assert!(frob_norm(&(rk - pe)) < 1e-6);
    }

    #[test]
    fn flat_pure_gauge_has_trivial_holonomy() {
        // scalar g = 1 + x^2 + y^2, A = dg g^{-1}; flat, so holonomy is I
        let g = parse("1 + x^2 + y^2").unwrap();
        let chart = xy_chart();
        let a = DiffForm::one_form(
            chart.clone(),
            vec![
                MatExpr::scalar(Expr::div(differentiate(&g, "x"), g.clone())),
                MatExpr::scalar(Expr::div(differentiate(&g, "y"), g.clone())),
            ],
        )
        .unwrap();
        assert!(curvature(&a).unwrap().is_zero().unwrap());
        let hol = holonomy(&a, &unit_square(), TransportMethod::Rk4, 10_000).unwrap();
        assert!((hol[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn square_holonomy_matches_edgewise_product() {
        // A = a u1 dx + b u2 dy with constant a, b
        let (a_c, b_c) = (0.5, 1.0 / 3.0);
        let conn = DiffForm::one_form(
            xy_chart(),
            vec![gen_times(&su2_u1(), "1/2"), gen_times(&su2_u2(), "1/3")],
        )
        .unwrap();
        // edges bottom, right, top, left in ODE order: later edges compose
        // from the left
        let e = |m: &CMat, s: f64| exp_matrix(&m.map(|c| c * s)).unwrap();
        let want = e(&su2_u2(), b_c) * e(&su2_u1(), a_c) * e(&su2_u2(), -b_c) * e(&su2_u1(), -a_c);
        for method in [TransportMethod::Rk4, TransportMethod::ProdExp] {
            let hol = holonomy(&conn, &unit_square(), method, 8000).unwrap();
            assert!(frob_norm(&(hol - want.clone())) < 1e-6, "{method:?}");
        }
    }

    #[test]
    fn holonomy_conjugates_under_constant_gauge_change() {
        let conn = DiffForm::one_form(
            xy_chart(),
            vec![gen_times(&su2_u1(), "x"), gen_times(&su2_u2(), "y - x^2")],
        )
        .unwrap();
        // constant g = exp(u2/4) entered exactly: cos(1/4) ~ 31/32 loses too
        // much, so conjugate the form symbolically with a rational matrix
        let g_sym = MatExpr::from_entries(vec![
            vec![parse("4/5").unwrap(), parse("-3/5").unwrap()],
            vec![parse("3/5").unwrap(), parse("4/5").unwrap()],
        ])
        .unwrap();
        let conj = conjugate_form(&conn, &g_sym).unwrap();
        let hol = holonomy(&conn, &unit_square(), TransportMethod::Rk4, 4000).unwrap();
        let hol_conj = holonomy(&conj, &unit_square(), TransportMethod::Rk4, 4000).unwrap();
        let g_num = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.8, 0.0),
                Complex64::new(-0.6, 0.0),
                Complex64::new(0.6, 0.0),
                Complex64::new(0.8, 0.0),
            ],
        );
        let want = &g_num * hol * g_num.clone().try_inverse().unwrap();
        assert!(frob_norm(&(hol_conj - want)) < 1e-6);
    }

    #[test]
    fn wilson_loop_examples() {
        // A = 0: trace of the identity
        let zero = DiffForm::zero(xy_chart(), 1, 2);
        let w = wilson_loop(&zero, &unit_square(), TransportMethod::ProdExp, 100).unwrap();
        assert!((w - Complex64::new(2.0, 0.0)).norm() < 1e-12);

        // abelian A = theta u3 x dy on the unit square: oint A = theta u3,
        // so W = tr exp(i theta u3) = 2 cosh theta
        let theta: f64 = 0.6;
        let a = DiffForm::one_form(
            xy_chart(),
            vec![MatExpr::zero(2), gen_times(&su2_u3(), "3/5*x")],
        )
        .unwrap();
        let w = wilson_loop(&a, &unit_square(), TransportMethod::Rk4, 8000).unwrap();
        let want = 2.0 * theta.cosh();
        assert!((w - Complex64::new(want, 0.0)).norm() < 1e-6, "got {w}");

        // conjugation invariance
        let g_sym = MatExpr::from_entries(vec![
            vec![parse("4/5").unwrap(), parse("-3/5").unwrap()],
            vec![parse("3/5").unwrap(), parse("4/5").unwrap()],
        ])
        .unwrap();
        let conj = conjugate_form(&a, &g_sym).unwrap();
        let w2 = wilson_loop(&conj, &unit_square(), TransportMethod::Rk4, 8000).unwrap();
        assert!((w - w2).norm() < 1e-8);
    }

    #[test]
    fn covariant_derivative_examples() {
        let chart = xy_chart();
        let y_field = VectorField::new(
            chart.clone(),
            vec![parse("x").unwrap(), parse("1").unwrap()],
        )
        .unwrap();
        let s = vec![parse("x*y").unwrap(), parse("y^2").unwrap()];

        // A = 0 reduces to the directional derivative
        let zero = DiffForm::zero(chart.clone(), 1, 2);
        let ds = covariant_derivative_section(&s, &y_field, &zero).unwrap();
        for (got, want) in ds.iter().zip(["x*y + x", "2*y"]) {
            assert_eq!(got.to_string(), want);
        }

        let a = DiffForm::one_form(
            chart.clone(),
            vec![gen_times(&su2_u1(), "y"), gen_times(&su2_u2(), "x")],
        )
        .unwrap();

        // Leibniz: nabla_Y(f s) - f nabla_Y s - Y(f) s = 0
        let f = parse("x^2 - y").unwrap();
        let fs: Vec<Expr> = s.iter().map(|c| Expr::mul2(f.clone(), c.clone())).collect();
        let lhs = covariant_derivative_section(&fs, &y_field, &a).unwrap();
        let nabla_s = covariant_derivative_section(&s, &y_field, &a).unwrap();
        let yf = y_field.apply(&f);
        for i in 0..2 {
            let resid = Expr::add(vec![
                lhs[i].clone(),
                Expr::neg(Expr::mul2(f.clone(), nabla_s[i].clone())),
                Expr::neg(Expr::mul2(yf.clone(), s[i].clone())),
            ]);
            assert!(crate::expr::poly::is_zero(&resid).unwrap());
        }
    }

    #[test]
    fn commutator_of_covariant_derivatives_is_curvature() {
        let chart = xy_chart();
        let x_field = VectorField::new(
            chart.clone(),
            vec![parse("1").unwrap(), parse("x").unwrap()],
        )
        .unwrap();
        let y_field = VectorField::new(
            chart.clone(),
            vec![parse("y").unwrap(), parse("2").unwrap()],
        )
        .unwrap();
        let a = DiffForm::one_form(
            chart.clone(),
            vec![gen_times(&su2_u1(), "y"), gen_times(&su2_u3(), "x*y")],
        )
        .unwrap();
        let s = vec![parse("x").unwrap(), parse("y").unwrap()];

        let nyx = covariant_derivative_section(
            &covariant_derivative_section(&s, &y_field, &a).unwrap(),
            &x_field,
            &a,
        )
        .unwrap();
        let nxy = covariant_derivative_section(
            &covariant_derivative_section(&s, &x_field, &a).unwrap(),
            &y_field,
            &a,
        )
        .unwrap();
        let bracket = commutator(&x_field, &y_field).unwrap();
        let nbr = covariant_derivative_section(&s, &bracket, &a).unwrap();

        let f = curvature(&a).unwrap();
        let f_xy = two_form_on_fields(&f, &x_field, &y_field).unwrap();
        for i in 0..2 {
            let mut curv_s = Vec::new();
            for j in 0..2 {
                curv_s.push(Expr::mul2(f_xy.entries[i][j].clone(), s[j].clone()));
            }
            let resid = Expr::add(vec![
                nyx[i].clone(),
                Expr::neg(nxy[i].clone()),
                Expr::neg(nbr[i].clone()),
                Expr::neg(Expr::add(curv_s)),
            ]);
            assert!(
                crate::expr::poly::is_zero(&resid).unwrap(),
                "component {i}"
            );
        }
    }

    #[test]
    fn transport_then_reverse_is_identity() {
        let a = DiffForm::one_form(
            xy_chart(),
            vec![gen_times(&su2_u1(), "x + y"), gen_times(&su2_u2(), "x*y")],
        )
        .unwrap();
        let path = PathCurve::symbolic(
            xy_chart(),
            vec![parse("t").unwrap(), parse("t^2").unwrap()],
        )
        .unwrap();
        let g0 = CMat::identity(2, 2);
        let fwd = parallel_transport(&a, &path, &g0, TransportMethod::Rk4, 5000).unwrap();
        let back =
            parallel_transport(&a, &path.reversed(), &fwd, TransportMethod::Rk4, 5000).unwrap();
        assert!(frob_norm(&(back - g0)) < 1e-6);
    }

    #[test]
    fn loop_and_path_validation() {
        let open = PathCurve::polyline(xy_chart(), vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(Loop::new(open).unwrap_err(), GaugeError::NotClosed);
        assert_eq!(
            PathCurve::polyline(xy_chart(), vec![vec![0.0, 0.0]]).unwrap_err(),
            GaugeError::BadPolyline
        );
        let err = PathCurve::symbolic(xy_chart(), vec![parse("t + s").unwrap(), Expr::zero()])
            .unwrap_err();
        assert_eq!(err, GaugeError::BadParameter("s".to_string()));
        let zero = DiffForm::zero(xy_chart(), 1, 2);
        let sq = unit_square();
        assert_eq!(
            holonomy(&zero, &sq, TransportMethod::Rk4, 0).unwrap_err(),
            GaugeError::BadSteps
        );
        let singular = CMat::zeros(2, 2);
        assert_eq!(
            parallel_transport(
                &zero,
                sq.path(),
                &singular,
                TransportMethod::Rk4,
                10
            )
            .unwrap_err(),
            GaugeError::SingularInitial
        );
    }
}
