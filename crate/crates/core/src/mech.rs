//! Hamiltonian mechanics on the standard chart (R^{2n}, omega = sum dq_i ^ dp_i).
//!
//! Sign conventions: X_f = sum ∂f/∂p_i ∂/∂q_i - ∂f/∂q_i ∂/∂p_i, so X_q = -∂/∂p
//! and {q, p} = -1. Symbolic results come back canonicalized, which turns
//! "this residual vanishes identically" into a decidable check.

use crate::expr::calculus::{compile_real, differentiate, CompiledExpr, EvalError};
use crate::expr::poly::{canonicalize, CanonError};
use crate::expr::Expr;
use crate::forms::{Chart, DiffForm, FormsError, VectorField};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MechError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Canon(#[from] CanonError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("step size must be positive and finite")]
    BadStep,
    #[error("duration must be non-negative and finite")]
    BadDuration,
    #[error("dimension {got} where {want} was expected")]
    Dimension { got: usize, want: usize },
    #[error("state became non-finite at step {0}")]
    NonFiniteState(usize),
}

/// Coordinates q_1..q_n then p_1..p_n; plain "q", "p" when n = 1.
pub fn standard_chart(n: usize) -> Chart {
    let names = if n == 1 {
        vec!["q".to_string(), "p".to_string()]
    } else {
        let mut v: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
        v.extend((1..=n).map(|i| format!("p{i}")));
        v
    };
    Chart::new(names).expect("distinct generated names")
}

/// X_f, with ∂f/∂p_i over the q slots and -∂f/∂q_i over the p slots.
pub fn hamiltonian_vf(f: &Expr, n: usize) -> Result<VectorField, MechError> {
    let chart = standard_chart(n);
    chart.check_expr(f, &[])?;
    let mut comps = Vec::with_capacity(2 * n);
    for i in 0..n {
        comps.push(canonicalize(&differentiate(f, &chart.names[n + i]))?);
    }
    for i in 0..n {
        comps.push(canonicalize(&Expr::neg(differentiate(f, &chart.names[i])))?);
    }
    Ok(VectorField::new(chart, comps)?)
}

/// {f, g} = sum ∂f/∂p_i ∂g/∂q_i - ∂f/∂q_i ∂g/∂p_i, canonicalized.
pub fn poisson(f: &Expr, g: &Expr, n: usize) -> Result<Expr, MechError> {
    let chart = standard_chart(n);
    chart.check_expr(f, &[])?;
    chart.check_expr(g, &[])?;
    let mut terms = Vec::with_capacity(2 * n);
    for i in 0..n {
        let q = &chart.names[i];
        let p = &chart.names[n + i];
        terms.push(Expr::mul2(differentiate(f, p), differentiate(g, q)));
        terms.push(Expr::neg(Expr::mul2(
            differentiate(f, q),
            differentiate(g, p),
        )));
    }
    Ok(canonicalize(&Expr::add(terms))?)
}

/// Vector-field commutator [X, Y], componentwise X(Y^i) - Y(X^i).
pub fn commutator(x: &VectorField, y: &VectorField) -> Result<VectorField, MechError> {
    if x.chart != y.chart {
        return Err(FormsError::ChartMismatch.into());
    }
    let comps = (0..x.chart.dim())
        .map(|i| {
            canonicalize(&Expr::add2(
                x.apply(&y.comps[i]),
                Expr::neg(y.apply(&x.comps[i])),
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VectorField::new(x.chart.clone(), comps)?)
}

/// Componentwise canonical form of [X_f, X_g] - X_{{f,g}}; identically zero,
/// and computing both sides independently is what makes that worth asserting.
pub fn bracket_homomorphism_residual(
    f: &Expr,
    g: &Expr,
    n: usize,
) -> Result<VectorField, MechError> {
    let xf = hamiltonian_vf(f, n)?;
    let xg = hamiltonian_vf(g, n)?;
    let lhs = commutator(&xf, &xg)?;
    let rhs = hamiltonian_vf(&poisson(f, g, n)?, n)?;
    let comps = lhs
        .comps
        .iter()
        .zip(&rhs.comps)
        .map(|(a, b)| canonicalize(&Expr::add2(a.clone(), Expr::neg(b.clone()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VectorField::new(lhs.chart.clone(), comps)?)
}

/// Degrees of freedom plus the Hamiltonian that drives the flow.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    pub n: usize,
    pub h: Expr,
}

impl HamiltonianSystem {
    pub fn new(n: usize, h: Expr) -> Result<Self, MechError> {
        standard_chart(n).check_expr(&h, &[])?;
        Ok(HamiltonianSystem { n, h })
    }
}

/// Full steps of size `h` covering `[0, t_final]` plus the leftover shorter
/// step. A quotient that is whole up to fp noise must not grow a sliver step.
pub(crate) fn split_duration(t_final: f64, h: f64) -> (u64, f64) {
    let mut full = (t_final / h).floor() as u64;
    let mut rem = t_final - full as f64 * h;
    if rem >= h * (1.0 - 1e-9) {
        full += 1;
        rem = 0.0;
    } else if rem <= h * 1e-12 {
        rem = 0.0;
    }
    (full, rem)
}

/// Classical fixed-step RK4 for q' = ∂H/∂p, p' = -∂H/∂q. Rows are (t, state)
/// starting at t = 0; when `t_final` is not a whole number of steps a final
/// shorter step lands exactly on it.
pub fn flow_integrate(
    sys: &HamiltonianSystem,
    x0: &[f64],
    t_final: f64,
    h: f64,
) -> Result<Vec<(f64, Vec<f64>)>, MechError> {
    if !h.is_finite() || h <= 0.0 {
        return Err(MechError::BadStep);
    }
    if !t_final.is_finite() || t_final < 0.0 {
        return Err(MechError::BadDuration);
    }
    let chart = standard_chart(sys.n);
    let dim = chart.dim();
    if x0.len() != dim {
        return Err(MechError::Dimension {
            got: x0.len(),
            want: dim,
        });
    }
    let field = hamiltonian_vf(&sys.h, sys.n)?;
    let compiled = field
        .comps
        .iter()
        .map(|c| compile_real(c, &chart.names))
        .collect::<Result<Vec<_>, _>>()?;

    let (full, rem) = split_duration(t_final, h);
    let mut rows = Vec::with_capacity(full as usize + 2);
    let mut state = x0.to_vec();
    rows.push((0.0, state.clone()));
    for step in 1..=full {
        state = rk4_step(&compiled, &state, h).map_err(|_| MechError::NonFiniteState(step as usize))?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(MechError::NonFiniteState(step as usize));
        }
        rows.push((step as f64 * h, state.clone()));
    }
    if rem > 0.0 {
        let step = full as usize + 1;
        state = rk4_step(&compiled, &state, rem).map_err(|_| MechError::NonFiniteState(step))?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(MechError::NonFiniteState(step));
        }
        rows.push((t_final, state));
    }
    Ok(rows)
}

fn rk4_step(field: &[CompiledExpr], x: &[f64], h: f64) -> Result<Vec<f64>, EvalError> {
    let eval = |at: &[f64]| -> Result<Vec<f64>, EvalError> {
        field.iter().map(|c| c.eval(at)).collect()
    };
    let shift = |base: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(a, b)| a + s * b).collect()
    };
    let k1 = eval(x)?;
    let k2 = eval(&shift(x, &k1, 0.5 * h))?;
    let k3 = eval(&shift(x, &k2, 0.5 * h))?;
    let k4 = eval(&shift(x, &k3, h))?;
    Ok((0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// The one-form iota_X omega - d mu on X's chart, canonicalized; zero exactly
/// when mu generates X. The chart's first n names are positions and the last
/// n are the paired momenta, so omega = sum d(chart_i) ^ d(chart_{n+i}).
pub fn moment_condition_residual(
    x: &VectorField,
    mu: &Expr,
    n: usize,
) -> Result<DiffForm, MechError> {
    let chart = &x.chart;
    if chart.dim() != 2 * n {
        return Err(MechError::Dimension {
            got: chart.dim(),
            want: 2 * n,
        });
    }
    chart.check_expr(mu, &[])?;
    let mut omega = DiffForm::zero(chart.clone(), 2, 1);
    for i in 0..n {
        let term = DiffForm::dx(chart.clone(), i).wedge(&DiffForm::dx(chart.clone(), n + i))?;
        omega = omega.add(&term)?;
    }
    let contracted = omega.interior(x)?;
    let dmu = DiffForm::scalar_function(chart.clone(), mu.clone()).ext_d();
    Ok(contracted.sub(&dmu)?.canonical()?)
}

/// Canonical form of L_{X_f} muX + L_{X_muX} f. The two derivatives are
/// {f, muX} and {muX, f}, so the sum cancels term by term; the value of the
/// check is that each summand is expanded independently.
pub fn noether_residual(f: &Expr, mu_x: &Expr, n: usize) -> Result<Expr, MechError> {
    let xf = hamiltonian_vf(f, n)?;
    let xmu = hamiltonian_vf(mu_x, n)?;
    Ok(canonicalize(&Expr::add2(xf.apply(mu_x), xmu.apply(f)))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;
    use crate::expr::poly::is_zero;

    fn vf_strings(v: &VectorField) -> Vec<String> {
        v.comps.iter().map(|c| c.to_string()).collect()
    }

    #[test]
    fn hamiltonian_vf_prototypes() {
        let xq = hamiltonian_vf(&parse("q").unwrap(), 1).unwrap();
        assert_eq!(vf_strings(&xq), vec!["0", "-1"]);
        let xp = hamiltonian_vf(&parse("p").unwrap(), 1).unwrap();
        assert_eq!(vf_strings(&xp), vec!["1", "0"]);
        let xh = hamiltonian_vf(&parse("(q^2 + p^2)/2").unwrap(), 1).unwrap();
        assert_eq!(vf_strings(&xh), vec!["p", "-q"]);
        let c = hamiltonian_vf(&parse("7").unwrap(), 1).unwrap();
        assert_eq!(vf_strings(&c), vec!["0", "0"]);
    }

    #[test]
    fn poisson_prototypes() {
        let q = parse("q").unwrap();
        let p = parse("p").unwrap();
        assert_eq!(poisson(&q, &p, 1).unwrap().to_string(), "-1");
        assert_eq!(poisson(&p, &q, 1).unwrap().to_string(), "1");
        assert_eq!(poisson(&q, &q, 1).unwrap().to_string(), "0");
        // two degrees of freedom: {q1, p2} = 0, {q2, p2} = -1
        let q1 = parse("q1").unwrap();
        let q2 = parse("q2").unwrap();
        let p2 = parse("p2").unwrap();
        assert_eq!(poisson(&q1, &p2, 2).unwrap().to_string(), "0");
        assert_eq!(poisson(&q2, &p2, 2).unwrap().to_string(), "-1");
    }

    #[test]
    fn poisson_rejects_foreign_variables() {
        let err = poisson(&parse("q + z").unwrap(), &parse("p").unwrap(), 1).unwrap_err();
        assert_eq!(
            err,
            MechError::Forms(FormsError::ForeignVariable("z".to_string()))
        );
    }

    #[test]
    fn bracket_homomorphism_vanishes() {
        for (f, g) in [("q", "p"), ("q^2", "q*p"), ("q^3", "p^2")] {
            let r =
                bracket_homomorphism_residual(&parse(f).unwrap(), &parse(g).unwrap(), 1).unwrap();
            for comp in &r.comps {
                assert!(is_zero(comp).unwrap(), "{f}, {g} -> {comp}");
            }
        }
    }

    #[test]
    fn leibniz_and_jacobi_instances() {
        let f = parse("q^2 + p").unwrap();
        let g = parse("q*p").unwrap();
        let h = parse("p^3 - q").unwrap();
        let fg = Expr::mul2(f.clone(), g.clone());
        let leibniz = Expr::add2(
            poisson(&fg, &h, 1).unwrap(),
            Expr::neg(Expr::add2(
                Expr::mul2(f.clone(), poisson(&g, &h, 1).unwrap()),
                Expr::mul2(poisson(&f, &h, 1).unwrap(), g.clone()),
            )),
        );
        assert!(is_zero(&leibniz).unwrap());
        let jacobi = Expr::add(vec![
            poisson(&f, &poisson(&g, &h, 1).unwrap(), 1).unwrap(),
            poisson(&g, &poisson(&h, &f, 1).unwrap(), 1).unwrap(),
            poisson(&h, &poisson(&f, &g, 1).unwrap(), 1).unwrap(),
        ]);
        assert!(is_zero(&jacobi).unwrap());
    }

    #[test]
    fn flow_rotates_the_oscillator() {
        let sys = HamiltonianSystem::new(1, parse("(q^2 + p^2)/2").unwrap()).unwrap();
        let rows = flow_integrate(&sys, &[1.0, 0.0], std::f64::consts::FRAC_PI_2, 1e-3).unwrap();
        let (t, last) = rows.last().unwrap();
        assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((last[0] - 0.0).abs() < 1e-6, "q final {}", last[0]);
        assert!((last[1] + 1.0).abs() < 1e-6, "p final {}", last[1]);
    }

    #[test]
    fn flow_translates_freely() {
        let sys = HamiltonianSystem::new(1, parse("p").unwrap()).unwrap();
        let rows = flow_integrate(&sys, &[0.0, 1.0], 1.0, 0.125).unwrap();
        assert_eq!(rows.len(), 9);
        let (t, last) = rows.last().unwrap();
        assert_eq!(*t, 1.0);
        assert!((last[0] - 1.0).abs() < 1e-12);
        assert!((last[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_reports_blowup_step() {
        // p' = -p^2 with p(0) = -1 blows up at t = 1
        let sys = HamiltonianSystem::new(1, parse("q*p^2").unwrap()).unwrap();
        let err = flow_integrate(&sys, &[1.0, -1.0], 2.0, 0.01).unwrap_err();
        match err {
            MechError::NonFiniteState(step) => assert!(step >= 90, "step {step}"),
            other => panic!("wanted NonFiniteState, got {other:?}"),
        }
    }

    #[test]
    fn flow_validates_input() {
        let sys = HamiltonianSystem::new(1, parse("p").unwrap()).unwrap();
        assert_eq!(
            flow_integrate(&sys, &[0.0, 0.0], 1.0, 0.0).unwrap_err(),
            MechError::BadStep
        );
        assert_eq!(
            flow_integrate(&sys, &[0.0, 0.0], -1.0, 0.1).unwrap_err(),
            MechError::BadDuration
        );
        assert_eq!(
            flow_integrate(&sys, &[0.0], 1.0, 0.1).unwrap_err(),
            MechError::Dimension { got: 1, want: 2 }
        );
    }

    #[test]
    fn moment_condition_examples() {
        // rotation on R^2, omega = dx ^ dy
        let plane = Chart::new(vec!["x".to_string(), "y".to_string()]).unwrap();
        let rot = VectorField::new(
            plane.clone(),
            vec![
                Expr::neg(parse("y").unwrap()),
                parse("x").unwrap(),
            ],
        )
        .unwrap();
        let mu = parse("-(x^2 + y^2)/2").unwrap();
        assert!(moment_condition_residual(&rot, &mu, 1)
            .unwrap()
            .is_zero()
            .unwrap());
        // a wrong candidate leaves a visible residual
        let bad = parse("x^2").unwrap();
        assert!(!moment_condition_residual(&rot, &bad, 1)
            .unwrap()
            .is_zero()
            .unwrap());

        // R^6 with omega = sum dx_i ^ dy_i
        let names: Vec<String> = ["x1", "x2", "x3", "y1", "y2", "y3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let space = Chart::new(names).unwrap();
        // linear momentum: X = d/dx1, mu = y1
        let zero = Expr::zero;
        let translation = VectorField::new(
            space.clone(),
            vec![Expr::one(), zero(), zero(), zero(), zero(), zero()],
        )
        .unwrap();
        assert!(
            moment_condition_residual(&translation, &parse("y1").unwrap(), 3)
                .unwrap()
                .is_zero()
                .unwrap()
        );
        // angular momentum about e3: X = (a x x, a x y), mu = (x x y) . e3
        let rotation = VectorField::new(
            space,
            vec![
                Expr::neg(parse("x2").unwrap()),
                parse("x1").unwrap(),
                zero(),
                Expr::neg(parse("y2").unwrap()),
                parse("y1").unwrap(),
                zero(),
            ],
        )
        .unwrap();
        let angular = parse("x1*y2 - x2*y1").unwrap();
        assert!(moment_condition_residual(&rotation, &angular, 3)
            .unwrap()
            .is_zero()
            .unwrap());
    }

    #[test]
    fn noether_residual_vanishes() {
        // free particle conserves linear momentum
        let r = noether_residual(&parse("p^2/2").unwrap(), &parse("p").unwrap(), 1).unwrap();
        assert!(is_zero(&r).unwrap());
        // any f is constant along its own flow
        let f = parse("q^2*p + q").unwrap();
        assert!(is_zero(&noether_residual(&f, &f, 1).unwrap()).unwrap());
        // the identity holds while neither term vanishes
        let f = parse("q^2 + p^2").unwrap();
        let mu = parse("q*p").unwrap();
        let lie = hamiltonian_vf(&f, 1).unwrap().apply(&mu);
        assert!(!is_zero(&lie).unwrap());
        assert!(is_zero(&noether_residual(&f, &mu, 1).unwrap()).unwrap());
    }

    #[test]
    fn energy_drift_stays_small() {
        let h_expr = parse("p^2/2 + q^2/2").unwrap();
        let sys = HamiltonianSystem::new(1, h_expr.clone()).unwrap();
        let rows = flow_integrate(&sys, &[1.0, 0.0], 100.0, 1e-3).unwrap();
        assert_eq!(rows.len(), 100_001);
        let chart = standard_chart(1);
        let energy = compile_real(&h_expr, &chart.names).unwrap();
        let e0 = energy.eval(&rows[0].1).unwrap();
        let mut worst: f64 = 0.0;
        for (_, state) in &rows {
            let e = energy.eval(state).unwrap();
            worst = worst.max(((e - e0) / e0).abs());
        }
        assert!(worst < 1e-6, "relative drift {worst}");
    }
}
