//! Prequantization over the standard chart: Q(f) = -i hbar nabla_{X_f} - f
//! acting on polynomial sections, with hbar kept symbolic so operator
//! identities hold coefficientwise in hbar.
//!
//! The bundle is trivial with global potential alpha = sum q_i dp_i and
//! connection form -(i/hbar) alpha; sections are scalar expressions in the
//! chart variables and hbar.

use crate::expr::poly::{canonicalize, CanonError};
use crate::expr::Expr;
use crate::scalar::GaussQ;
use crate::forms::{DiffForm, FormsError, MatExpr, VectorField};
use crate::mech::{hamiltonian_vf, poisson, standard_chart, MechError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PrequantError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Canon(#[from] CanonError),
    #[error(transparent)]
    Mech(#[from] MechError),
}

fn i_const() -> Expr {
    Expr::Const(GaussQ::i())
}

fn hbar() -> Expr {
    Expr::Var("hbar".to_string())
}

/// The tautological one-form sum q_i dp_i on the standard 2n-chart.
pub fn tautological_alpha(n: usize) -> DiffForm {
    let chart = standard_chart(n);
    let mut comps = vec![MatExpr::scalar(Expr::zero()); 2 * n];
    for i in 0..n {
        comps[n + i] = MatExpr::scalar(Expr::Var(chart.names[i].clone()));
    }
    DiffForm::one_form(chart, comps).expect("component count matches chart")
}

/// Scalar connection form on the prequantum line bundle.
#[derive(Clone, Debug)]
pub struct PrequantConnection {
    pub n: usize,
    /// The form in nabla s = ds + a(X) s; default -(i/hbar) alpha.
    pub a: DiffForm,
}

impl PrequantConnection {
    pub fn standard(n: usize) -> Self {
        let a = tautological_alpha(n).scale(&Expr::div(Expr::neg(i_const()), hbar()));
        PrequantConnection { n, a }
    }

    /// Same chart, any scalar one-form; lets tests probe wrong curvature.
    pub fn with_form(n: usize, a: DiffForm) -> Result<Self, PrequantError> {
        if a.degree != 1 || a.m != 1 {
            return Err(FormsError::DegreeMismatch.into());
        }
        if a.chart != standard_chart(n) {
            return Err(FormsError::ChartMismatch.into());
        }
        Ok(PrequantConnection { n, a })
    }
}

/// a(X) for the scalar connection form.
fn form_on_field(a: &DiffForm, x: &VectorField) -> Expr {
    let comps = a.one_form_components();
    Expr::add(
        comps
            .iter()
            .zip(&x.comps)
            .map(|(mat, v)| Expr::mul2(mat.entries[0][0].clone(), v.clone()))
            .collect(),
    )
}

/// Q(f) s = -i hbar (ds(X_f) + a(X_f) s) - f s, canonicalized.
pub fn prequant_op(
    f: &Expr,
    conn: &PrequantConnection,
    s: &Expr,
) -> Result<Expr, PrequantError> {
    let chart = standard_chart(conn.n);
    chart.check_expr(f, &[])?;
    chart.check_expr(s, &["hbar"])?;
    let xf = hamiltonian_vf(f, conn.n)?;
    let nabla = Expr::add2(
        xf.apply(s),
        Expr::mul2(form_on_field(&conn.a, &xf), s.clone()),
    );
    let out = Expr::add2(
        Expr::mul2(Expr::mul2(Expr::neg(i_const()), hbar()), nabla),
        Expr::neg(Expr::mul2(f.clone(), s.clone())),
    );
    Ok(canonicalize(&out)?)
}

/// Canonical form of [Q(f), Q(g)] s + i hbar Q({f, g}) s; identically zero,
/// which is the quantum condition [Q(f), Q(g)] = -i hbar Q({f, g}).
pub fn quantum_condition_residual(
    f: &Expr,
    g: &Expr,
    conn: &PrequantConnection,
    s: &Expr,
) -> Result<Expr, PrequantError> {
    let qg_s = prequant_op(g, conn, s)?;
    let qf_qg_s = prequant_op(f, conn, &qg_s)?;
    let qf_s = prequant_op(f, conn, s)?;
    let qg_qf_s = prequant_op(g, conn, &qf_s)?;
    let bracket = poisson(f, g, conn.n)?;
    let q_bracket_s = prequant_op(&bracket, conn, s)?;
    let residual = Expr::add(vec![
        qf_qg_s,
        Expr::neg(qg_qf_s),
        Expr::mul2(Expr::mul2(i_const(), hbar()), q_bracket_s),
    ]);
    Ok(canonicalize(&residual)?)
}

/// curvature(a) + (i/hbar) sum dq_i ^ dp_i, canonicalized; the zero form
/// exactly when the connection has the prequantum curvature -(i/hbar) omega.
pub fn curvature_check(conn: &PrequantConnection) -> Result<DiffForm, PrequantError> {
    let chart = standard_chart(conn.n);
    let f = crate::forms::curvature(&conn.a)?;
    let mut omega = DiffForm::zero(chart.clone(), 2, 1);
    for i in 0..conn.n {
        let term =
            DiffForm::dx(chart.clone(), i).wedge(&DiffForm::dx(chart.clone(), conn.n + i))?;
        omega = omega.add(&term)?;
    }
    let residual = f.add(&omega.scale(&Expr::div(i_const(), hbar())))?;
    Ok(residual.canonical()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;
    use crate::expr::poly::{exprs_equal, is_zero};

    #[test]
    fn position_operator() {
        let conn = PrequantConnection::standard(1);
        let q = parse("q").unwrap();
        // Q(q) psi = i hbar dpsi/dp
        let got = prequant_op(&q, &conn, &parse("p^2").unwrap()).unwrap();
        assert_eq!(got.to_string(), "2*i*hbar*p");
        let got = prequant_op(&q, &conn, &parse("q*p").unwrap()).unwrap();
        assert!(exprs_equal(&got, &parse("i*hbar*q").unwrap()).unwrap());
    }

    #[test]
    fn momentum_operator() {
        let conn = PrequantConnection::standard(1);
        let p = parse("p").unwrap();
        // Q(p) psi = -i hbar dpsi/dq - p psi
        let got = prequant_op(&p, &conn, &parse("q").unwrap()).unwrap();
        assert!(exprs_equal(&got, &parse("-i*hbar - p*q").unwrap()).unwrap());
        let got = prequant_op(&p, &conn, &parse("1").unwrap()).unwrap();
        assert!(exprs_equal(&got, &parse("-p").unwrap()).unwrap());
    }

    #[test]
    fn constant_quantizes_to_minus_identity() {
        let conn = PrequantConnection::standard(1);
        let psi = parse("q^2*p + hbar*q").unwrap();
        let got = prequant_op(&parse("1").unwrap(), &conn, &psi).unwrap();
        assert!(exprs_equal(&got, &Expr::neg(psi)).unwrap());
    }

    #[test]
    fn quantization_is_linear_in_f() {
        let conn = PrequantConnection::standard(1);
        let (f, g) = (parse("q^2").unwrap(), parse("q*p").unwrap());
        let (c1, c2) = (parse("2 + 3*i").unwrap(), parse("-1/2*i").unwrap());
        let combo = Expr::add2(
            Expr::mul2(c1.clone(), f.clone()),
            Expr::mul2(c2.clone(), g.clone()),
        );
        let psi = parse("p^2 + q").unwrap();
        let lhs = prequant_op(&combo, &conn, &psi).unwrap();
        let rhs = Expr::add2(
            Expr::mul2(c1, prequant_op(&f, &conn, &psi).unwrap()),
            Expr::mul2(c2, prequant_op(&g, &conn, &psi).unwrap()),
        );
        assert!(exprs_equal(&lhs, &rhs).unwrap());
    }

    #[test]
    fn heisenberg_pair_satisfies_quantum_condition() {
        let conn = PrequantConnection::standard(1);
        let r = quantum_condition_residual(
            &parse("q").unwrap(),
            &parse("p").unwrap(),
            &conn,
            &parse("1").unwrap(),
        )
        .unwrap();
        assert!(is_zero(&r).unwrap());
    }

    #[test]
    fn quantum_condition_on_observable_grid() {
        let conn = PrequantConnection::standard(1);
        let observables = ["1", "q", "p", "q^2", "p^2", "q*p"];
        let sections = ["1", "q", "p", "q*p"];
        for f in &observables {
            for g in &observables {
                for s in &sections {
                    let r = quantum_condition_residual(
                        &parse(f).unwrap(),
                        &parse(g).unwrap(),
                        &conn,
                        &parse(s).unwrap(),
                    )
                    .unwrap();
                    assert!(is_zero(&r).unwrap(), "f={f} g={g} s={s}");
                }
            }
        }
    }

    #[test]
    fn quantum_condition_two_degrees_of_freedom() {
        let conn = PrequantConnection::standard(2);
        let r = quantum_condition_residual(
            &parse("q1*p2").unwrap(),
            &parse("q2^2").unwrap(),
            &conn,
            &parse("p1 + q2*p2").unwrap(),
        )
        .unwrap();
        assert!(is_zero(&r).unwrap());
    }

    #[test]
    fn curvature_matches_prequantum_form() {
        for n in [1, 3] {
            let conn = PrequantConnection::standard(n);
            assert!(curvature_check(&conn).unwrap().is_zero().unwrap(), "n={n}");
        }
        // perturbing by q dp shifts the curvature by dq ^ dp
        let chart = standard_chart(1);
        let perturbed = PrequantConnection::standard(1)
            .a
            .add(&tautological_alpha(1))
            .unwrap();
        let conn = PrequantConnection::with_form(1, perturbed).unwrap();
        let residual = curvature_check(&conn).unwrap();
        let want = DiffForm::dx(chart.clone(), 0)
            .wedge(&DiffForm::dx(chart, 1))
            .unwrap();
        assert!(residual.equals(&want).unwrap());
    }

    #[test]
    fn foreign_variables_are_rejected() {
        let conn = PrequantConnection::standard(1);
        assert!(prequant_op(&parse("q + z").unwrap(), &conn, &parse("1").unwrap()).is_err());
        // hbar is fine in the section but not in the observable
        assert!(prequant_op(&parse("hbar*q").unwrap(), &conn, &parse("1").unwrap()).is_err());
        assert!(prequant_op(&parse("q").unwrap(), &conn, &parse("hbar*p").unwrap()).is_ok());
    }
}
