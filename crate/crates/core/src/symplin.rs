//! Exact linear symplectic algebra over the rationals.
//!
//! Antisymmetric bilinear forms are plain rational matrices. The basis
//! routine produces exact Darboux-type normal coordinates: a kernel block
//! followed by canonically paired directions, certified by an exact matrix
//! identity rather than a numeric residual.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

/// Dense matrix of rationals, row-major.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymplinError {
    NotSquare,
    NotAntisymmetric,
    BadEntry { row: usize, col: usize, text: String },
    ShapeMismatch,
}

impl fmt::Display for SymplinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymplinError::NotSquare => write!(f, "matrix is not square"),
            SymplinError::NotAntisymmetric => write!(f, "matrix is not antisymmetric"),
            SymplinError::BadEntry { row, col, text } => {
                write!(f, "entry ({row},{col}) is not a rational: '{text}'")
            }
            SymplinError::ShapeMismatch => write!(f, "matrix shapes do not match"),
        }
    }
}

impl std::error::Error for SymplinError {}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self, SymplinError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(SymplinError::ShapeMismatch);
        }
        Ok(QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        QMatrix::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&v| BigRational::from_integer(BigInt::from(v)))
                        .collect()
                })
                .collect(),
        )
        .expect("rectangular literal")
    }

    /// Parse entries like "3", "-1/2".
    pub fn from_string_rows(rows: &[Vec<String>]) -> Result<Self, SymplinError> {
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (j, s) in row.iter().enumerate() {
                let parsed = parse_rational(s).ok_or_else(|| SymplinError::BadEntry {
                    row: i,
                    col: j,
                    text: s.clone(),
                })?;
                r.push(parsed);
            }
            out.push(r);
        }
        QMatrix::from_rows(out)
    }

    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| fmt_rational(&self[(i, j)])).collect())
            .collect()
    }

    pub fn transpose(&self) -> QMatrix {
        let mut t = QMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, o.rows, "inner dimensions must agree");
        let mut out = QMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let add = a * &o[(k, j)];
                    if !add.is_zero() {
                        out[(i, j)] += add;
                    }
                }
            }
        }
        out
    }

    pub fn is_antisymmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if self[(i, j)] != -self[(j, i)].clone() {
                    return false;
                }
            }
        }
        true
    }

    pub fn column(&self, j: usize) -> Vec<BigRational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn from_columns(cols: Vec<Vec<BigRational>>, dim: usize) -> QMatrix {
        let mut m = QMatrix::zeros(dim, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(n))
    }
}

pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// The standard form on R^{2n}: Omega = [[0, I], [-I, 0]].
pub fn standard_omega(n: usize) -> QMatrix {
    let mut m = QMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = BigRational::one();
        m[(n + i, i)] = -BigRational::one();
    }
    m
}

fn omega_pair(omega: &QMatrix, a: &[BigRational], b: &[BigRational]) -> BigRational {
    let mut acc = BigRational::zero();
    for i in 0..omega.rows {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..omega.cols {
            if omega[(i, j)].is_zero() || b[j].is_zero() {
                continue;
            }
            acc += &a[i] * &omega[(i, j)] * &b[j];
        }
    }
    acc
}

/// Row-reduce in place; returns pivot column indices.
fn rref(m: &mut QMatrix) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
            continue;
        };
        for j in 0..m.cols {
            let tmp = m[(p, j)].clone();
            m[(p, j)] = m[(row, j)].clone();
            m[(row, j)] = tmp;
        }
        let inv = m[(row, col)].recip();
        for j in col..m.cols {
            let v = &m[(row, j)] * &inv;
            m[(row, j)] = v;
        }
        for r in 0..m.rows {
            if r != row && !m[(r, col)].is_zero() {
                let factor = m[(r, col)].clone();
                for j in col..m.cols {
                    let v = &m[(r, j)] - &factor * &m[(row, j)];
                    m[(r, j)] = v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Basis of the kernel, one vector per free column, in column order.
pub fn kernel_basis(m: &QMatrix) -> Vec<Vec<BigRational>> {
    let mut r = m.clone();
    let pivots = rref(&mut r);
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    let mut out = Vec::new();
    for free in 0..m.cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); m.cols];
        v[free] = BigRational::one();
        for (prow, &pcol) in pivots.iter().enumerate() {
            v[pcol] = -r[(prow, free)].clone();
        }
        out.push(v);
    }
    out
}

pub fn rank(m: &QMatrix) -> usize {
    let mut r = m.clone();
    rref(&mut r).len()
}

/// Result of the normal-form construction for an antisymmetric form.
#[derive(Debug)]
pub struct SymplecticBasis {
    /// Columns: kernel vectors u_1..u_k, then e_1..e_m, then f_1..f_m.
    pub basis: QMatrix,
    pub kernel_dim: usize,
    pub pairs: usize,
}

impl SymplecticBasis {
    /// The certified normal form diag(0_k, [[0, I], [-I, 0]]).
    pub fn normal_form(&self) -> QMatrix {
        let k = self.kernel_dim;
        let m = self.pairs;
        let d = k + 2 * m;
        let mut nf = QMatrix::zeros(d, d);
        for i in 0..m {
            nf[(k + i, k + m + i)] = BigRational::one();
            nf[(k + m + i, k + i)] = -BigRational::one();
        }
        nf
    }
}

/// Exact normal form of an antisymmetric rational matrix.
///
/// Returns B with B^T Omega B = diag(0_k, [[0, I], [-I, 0]]), found by a
/// symplectic Gram-Schmidt sweep over a complement of the kernel. All pivot
/// choices scan in fixed order, so the output is deterministic.
pub fn symplectic_basis(omega: &QMatrix) -> Result<SymplecticBasis, SymplinError> {
    if omega.rows != omega.cols {
        return Err(SymplinError::NotSquare);
    }
    if !omega.is_antisymmetric() {
        return Err(SymplinError::NotAntisymmetric);
    }
    let d = omega.rows;
    let kernel = kernel_basis(omega);
    let k = kernel.len();

    // Extend the kernel to a full basis with standard basis vectors,
    // keeping only those that raise the rank.
    let mut complement: Vec<Vec<BigRational>> = Vec::new();
    for idx in 0..d {
        if kernel.len() + complement.len() == d {
            break;
        }
        let mut v = vec![BigRational::zero(); d];
        v[idx] = BigRational::one();
        let mut cols = kernel.clone();
        cols.extend(complement.iter().cloned());
        cols.push(v.clone());
        let m = QMatrix::from_columns(cols, d);
        if rank(&m) == kernel.len() + complement.len() + 1 {
            complement.push(v);
        }
    }
    debug_assert_eq!(k + complement.len(), d);

    // Symplectic Gram-Schmidt on the complement. Omega restricted to any
    // complement of the kernel is nondegenerate, so a partner always exists.
    let mut es: Vec<Vec<BigRational>> = Vec::new();
    let mut fs: Vec<Vec<BigRational>> = Vec::new();
    let mut work = complement;
    while !work.is_empty() {
        let e = work.remove(0);
        let j = work
            .iter()
            .position(|w| !omega_pair(omega, &e, w).is_zero())
            .expect("nondegenerate on the complement of the kernel");
        let w = work.remove(j);
        let c = omega_pair(omega, &e, &w);
        let f: Vec<BigRational> = w.iter().map(|x| x / &c).collect();
        for v in work.iter_mut() {
            // v' = v - Omega(v,f) e, then v'' = v' + Omega(v',e) f:
            // both pairings with the new (e, f) plane vanish afterwards.
            let a = omega_pair(omega, v, &f);
            for (vi, ei) in v.iter_mut().zip(&e) {
                *vi -= &a * ei;
            }
            let b = omega_pair(omega, v, &e);
            for (vi, fi) in v.iter_mut().zip(&f) {
                *vi += &b * fi;
            }
        }
        es.push(e);
        fs.push(f);
    }
    let m = es.len();
    let mut cols = kernel;
    cols.extend(es);
    cols.extend(fs);
    Ok(SymplecticBasis {
        basis: QMatrix::from_columns(cols, d),
        kernel_dim: k,
        pairs: m,
    })
}

/// A form is symplectic iff it is antisymmetric with trivial kernel.
pub fn is_symplectic(omega: &QMatrix) -> Result<bool, SymplinError> {
    if omega.rows != omega.cols {
        return Err(SymplinError::NotSquare);
    }
    Ok(omega.is_antisymmetric() && rank(omega) == omega.rows)
}

/// phi^T Omega' phi = Omega, checked exactly.
pub fn is_linear_symplectomorphism(
    phi: &QMatrix,
    omega_src: &QMatrix,
    omega_tgt: &QMatrix,
) -> Result<bool, SymplinError> {
    if omega_src.rows != omega_src.cols
        || omega_tgt.rows != omega_tgt.cols
        || phi.rows != omega_tgt.rows
        || phi.cols != omega_src.rows
    {
        return Err(SymplinError::ShapeMismatch);
    }
    Ok(phi.transpose().mul(&omega_tgt.mul(phi)) == *omega_src)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_normal_form(omega: &QMatrix) {
        let sb = symplectic_basis(omega).unwrap();
        let got = sb.basis.transpose().mul(&omega.mul(&sb.basis));
        assert_eq!(got, sb.normal_form());
        assert_eq!(sb.kernel_dim + 2 * sb.pairs, omega.rows);
    }

    #[test]
    fn standard_form_is_its_own_normal_form() {
        let omega = standard_omega(2);
        let sb = symplectic_basis(&omega).unwrap();
        assert_eq!(sb.kernel_dim, 0);
        assert_eq!(sb.pairs, 2);
        check_normal_form(&omega);
        assert!(is_symplectic(&omega).unwrap());
    }

    #[test]
    fn degenerate_form() {
        // rank 2 in dimension 3: one kernel direction
        let omega = QMatrix::from_i64_rows(&[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]]);
        let sb = symplectic_basis(&omega).unwrap();
        assert_eq!(sb.kernel_dim, 1);
        assert_eq!(sb.pairs, 1);
        check_normal_form(&omega);
        assert!(!is_symplectic(&omega).unwrap());
    }

    #[test]
    fn rejects_non_antisymmetric() {
        let m = QMatrix::from_i64_rows(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            symplectic_basis(&m).unwrap_err(),
            SymplinError::NotAntisymmetric
        );
    }

    #[test]
    fn rational_entries() {
        let omega = QMatrix::from_string_rows(&[
            vec!["0".into(), "1/2".into()],
            vec!["-1/2".into(), "0".into()],
        ])
        .unwrap();
        check_normal_form(&omega);
    }

    #[test]
    fn odd_dimension_always_degenerate() {
        let omega = QMatrix::from_i64_rows(&[
            &[0, 2, -1, 3, 0],
            &[-2, 0, 4, 1, 1],
            &[1, -4, 0, 0, 2],
            &[-3, -1, 0, 0, 5],
            &[0, -1, -2, -5, 0],
        ]);
        let sb = symplectic_basis(&omega).unwrap();
        assert!(sb.kernel_dim >= 1);
        check_normal_form(&omega);
    }

    #[test]
    fn linear_symplectomorphism_check() {
        let omega = standard_omega(1);
        // (q, p) -> (2q, p/2) preserves dq ^ dp
        let phi = QMatrix::from_string_rows(&[
            vec!["2".into(), "0".into()],
            vec!["0".into(), "1/2".into()],
        ])
        .unwrap();
        assert!(is_linear_symplectomorphism(&phi, &omega, &omega).unwrap());
        let bad = QMatrix::from_i64_rows(&[&[2, 0], &[0, 2]]);
        assert!(!is_linear_symplectomorphism(&bad, &omega, &omega).unwrap());
    }

    #[test]
    fn string_round_trip() {
        let omega = standard_omega(1);
        let rows = omega.to_string_rows();
        assert_eq!(rows[0], vec!["0", "1"]);
        let back = QMatrix::from_string_rows(&rows).unwrap();
        assert_eq!(back, omega);
    }
}
