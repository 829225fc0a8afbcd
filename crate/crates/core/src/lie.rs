//! Matrix Lie groups and algebras over Complex64.
//!
//! Everything here is numeric: the exponential via scaling and squaring,
//! tolerance-based membership tests for the classical algebras, and the
//! adjoint actions. The su(2) basis uses u_k = i*sigma_k, so the brackets
//! close with integer structure constants: [u3,u1] = 2u2 and cyclic.

use nalgebra::DMatrix;
pub use num_complex::Complex64;
use std::fmt;

pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub enum LieError {
    NotSquare,
    ShapeMismatch,
    Singular,
    UnknownAlgebra(String),
}

impl fmt::Display for LieError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieError::NotSquare => write!(f, "matrix is not square"),
            LieError::ShapeMismatch => write!(f, "matrix shapes do not match"),
            LieError::Singular => write!(f, "matrix is singular"),
            LieError::UnknownAlgebra(name) => write!(f, "unknown Lie algebra '{name}'"),
        }
    }
}

impl std::error::Error for LieError {}

pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Frobenius norm.
pub fn frob_norm(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
///
/// The argument is scaled so its norm is at most 1/2, expanded to machine
/// precision, then squared back. Accurate to about 1e-12 for norms up to 10.
pub fn exp_matrix(x: &CMat) -> Result<CMat, LieError> {
    if !x.is_square() {
        return Err(LieError::NotSquare);
    }
    let n = x.nrows();
    let norm = frob_norm(x);
    let mut s = 0u32;
    let mut scale = 1.0f64;
    while norm * scale > 0.5 {
        s += 1;
        scale *= 0.5;
    }
    let xs = x.map(|c| c * scale);
    // Taylor: with norm <= 1/2, term 18 is below 2^-18/18! ~ 1e-21.
    let mut acc = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=18u32 {
        term = (&term * &xs).map(|c| c / k as f64);
        acc += &term;
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    Ok(acc)
}

/// Classical matrix Lie algebras supported by the membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algebra {
    Su,
    So,
    Sl,
    U,
    Gl,
}

impl Algebra {
    pub fn from_name(name: &str) -> Result<Self, LieError> {
        Ok(match name {
            "su" => Algebra::Su,
            "so" => Algebra::So,
            "sl" => Algebra::Sl,
            "u" => Algebra::U,
            "gl" => Algebra::Gl,
            other => return Err(LieError::UnknownAlgebra(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algebra::Su => "su",
            Algebra::So => "so",
            Algebra::Sl => "sl",
            Algebra::U => "u",
            Algebra::Gl => "gl",
        }
    }
}

fn trace(m: &CMat) -> Complex64 {
    (0..m.nrows()).map(|i| m[(i, i)]).sum()
}

fn is_anti_hermitian(x: &CMat, tol: f64) -> bool {
    let n = x.nrows();
    for i in 0..n {
        for j in 0..n {
            let lhs = x[(i, j)].conj();
            let rhs = -x[(j, i)];
            if (lhs - rhs).norm() > tol {
                return false;
            }
        }
    }
    true
}

fn is_real(x: &CMat, tol: f64) -> bool {
    x.iter().all(|c| c.im.abs() <= tol)
}

fn is_real_skew(x: &CMat, tol: f64) -> bool {
    if !is_real(x, tol) {
        return false;
    }
    let n = x.nrows();
    for i in 0..n {
        for j in 0..n {
            if (x[(i, j)].re + x[(j, i)].re).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Membership test at the given tolerance.
pub fn in_algebra(x: &CMat, algebra: Algebra, tol: f64) -> Result<bool, LieError> {
    if !x.is_square() {
        return Err(LieError::NotSquare);
    }
    let finite = x.iter().all(|c| c.re.is_finite() && c.im.is_finite());
    if !finite {
        return Ok(false);
    }
    Ok(match algebra {
        Algebra::Su => is_anti_hermitian(x, tol) && trace(x).norm() <= tol,
        Algebra::So => is_real_skew(x, tol),
        Algebra::Sl => trace(x).norm() <= tol,
        Algebra::U => is_anti_hermitian(x, tol),
        Algebra::Gl => true,
    })
}

/// Ad_g(X) = g X g^{-1}; g must be invertible.
pub fn adjoint(g: &CMat, x: &CMat) -> Result<CMat, LieError> {
    if !g.is_square() || !x.is_square() {
        return Err(LieError::NotSquare);
    }
    if g.nrows() != x.nrows() {
        return Err(LieError::ShapeMismatch);
    }
    if g.clone().determinant().norm() <= 1e-12 {
        return Err(LieError::Singular);
    }
    let g_inv = g.clone().try_inverse().ok_or(LieError::Singular)?;
    Ok(g * x * g_inv)
}

/// ad_X(Y) = XY - YX.
pub fn ad(x: &CMat, y: &CMat) -> Result<CMat, LieError> {
    if !x.is_square() || !y.is_square() {
        return Err(LieError::NotSquare);
    }
    if x.nrows() != y.nrows() {
        return Err(LieError::ShapeMismatch);
    }
    Ok(x * y - y * x)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// u_1 = i*sigma_1 = [[0, i], [i, 0]].
pub fn su2_u1() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

/// u_2 = [[0, -1], [1, 0]], chosen so [u3, u1] = 2 u2.
pub fn su2_u2() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// u_3 = i*sigma_3 = [[i, 0], [0, -i]].
pub fn su2_u3() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)])
}
