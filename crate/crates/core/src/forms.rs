//! Matrix-valued differential forms on coordinate charts.
//!
//! A form stores one m-by-m matrix of expressions per strictly increasing
//! index tuple; scalar forms are the m = 1 case. The wedge multiplies
//! coefficients without commuting them, so for matrix-valued one-forms
//! (A ^ A)(X, Y) = [A(X), A(Y)] comes out of the same code path that handles
//! scalar forms.

use crate::expr::calculus::{differentiate, substitute};
use crate::expr::poly::{self, CanonError};
use crate::expr::Expr;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FormsError {
    #[error("charts do not match")]
    ChartMismatch,
    #[error("coefficient matrix sizes do not match")]
    SizeMismatch,
    #[error("degree out of range for this operation")]
    DegreeMismatch,
    #[error("duplicate coordinate name '{0}'")]
    DuplicateCoordinate(String),
    #[error("variable '{0}' is not a chart coordinate")]
    ForeignVariable(String),
    #[error("matrix is singular")]
    Singular,
    #[error("matrix inverse implemented for size at most 4, got {0}")]
    TooLarge(usize),
    #[error(transparent)]
    Canon(#[from] CanonError),
}

/// Ordered coordinate names.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Chart {
    pub names: Vec<String>,
}

impl Chart {
    pub fn new(names: Vec<String>) -> Result<Self, FormsError> {
        let mut seen = std::collections::HashSet::new();
        for n in &names {
            if !seen.insert(n.clone()) {
                return Err(FormsError::DuplicateCoordinate(n.clone()));
            }
        }
        Ok(Chart { names })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Error when an expression mentions variables outside the chart
    /// (beyond the listed extras such as "hbar").
    pub fn check_expr(&self, e: &Expr, extras: &[&str]) -> Result<(), FormsError> {
        for v in e.variables() {
            if self.index(&v).is_none() && !extras.contains(&v.as_str()) {
                return Err(FormsError::ForeignVariable(v));
            }
        }
        Ok(())
    }
}

/// Square matrix of expressions.
#[derive(Clone, PartialEq, Debug)]
pub struct MatExpr {
    pub m: usize,
    pub entries: Vec<Vec<Expr>>,
}

impl MatExpr {
    pub fn zero(m: usize) -> Self {
        MatExpr {
            m,
            entries: vec![vec![Expr::zero(); m]; m],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut out = MatExpr::zero(m);
        for i in 0..m {
            out.entries[i][i] = Expr::one();
        }
        out
    }

    pub fn scalar(e: Expr) -> Self {
        MatExpr {
            m: 1,
            entries: vec![vec![e]],
        }
    }

    pub fn from_entries(entries: Vec<Vec<Expr>>) -> Result<Self, FormsError> {
        let m = entries.len();
        if entries.iter().any(|row| row.len() != m) {
            return Err(FormsError::SizeMismatch);
        }
        Ok(MatExpr { m, entries })
    }

    pub fn add(&self, o: &MatExpr) -> Result<MatExpr, FormsError> {
        if self.m != o.m {
            return Err(FormsError::SizeMismatch);
        }
        let mut out = MatExpr::zero(self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                out.entries[i][j] =
                    Expr::add2(self.entries[i][j].clone(), o.entries[i][j].clone());
            }
        }
        Ok(out)
    }

    pub fn matmul(&self, o: &MatExpr) -> Result<MatExpr, FormsError> {
        if self.m != o.m {
            return Err(FormsError::SizeMismatch);
        }
        let mut out = MatExpr::zero(self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                let mut acc = Vec::with_capacity(self.m);
                for k in 0..self.m {
                    acc.push(Expr::mul2(
                        self.entries[i][k].clone(),
                        o.entries[k][j].clone(),
                    ));
                }
                out.entries[i][j] = Expr::add(acc);
            }
        }
        Ok(out)
    }

    /// Product that broadcasts 1x1 matrices as scalars.
    pub fn mul_general(&self, o: &MatExpr) -> Result<MatExpr, FormsError> {
        if self.m == o.m {
            return self.matmul(o);
        }
        if self.m == 1 {
            return Ok(o.scale(&self.entries[0][0]));
        }
        if o.m == 1 {
            return Ok(self.scale(&o.entries[0][0]));
        }
        Err(FormsError::SizeMismatch)
    }

    pub fn scale(&self, e: &Expr) -> MatExpr {
        self.map(|x| Expr::mul2(e.clone(), x.clone()))
    }

    pub fn neg(&self) -> MatExpr {
        self.map(|x| Expr::neg(x.clone()))
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> MatExpr {
        MatExpr {
            m: self.m,
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(&f).collect())
                .collect(),
        }
    }

    pub fn trace(&self) -> Expr {
        Expr::add((0..self.m).map(|i| self.entries[i][i].clone()).collect())
    }

    /// Fast structural zero check; sound but incomplete.
    fn looks_zero(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().all(|e| e.is_zero_const()))
    }

    /// Decidable zero test (atoms allowed in entries).
    pub fn is_zero(&self) -> Result<bool, CanonError> {
        for row in &self.entries {
            for e in row {
                if !poly::is_zero(e)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Canonicalize every entry.
    pub fn canonical(&self) -> Result<MatExpr, CanonError> {
        let mut out = MatExpr::zero(self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                out.entries[i][j] = poly::canonicalize(&self.entries[i][j])?;
            }
        }
        Ok(out)
    }

    /// Determinant by Laplace expansion; sizes up to 4.
    pub fn det(&self) -> Result<Expr, FormsError> {
        if self.m > 4 {
            return Err(FormsError::TooLarge(self.m));
        }
        Ok(det_rec(&self.entries))
    }

    /// Symbolic inverse via the adjugate. Errors if the determinant is
    /// identically zero.
    pub fn inverse(&self) -> Result<MatExpr, FormsError> {
        if self.m > 4 {
            return Err(FormsError::TooLarge(self.m));
        }
        let det = det_rec(&self.entries);
        if poly::is_zero(&det)? {
            return Err(FormsError::Singular);
        }
        let m = self.m;
        let mut out = MatExpr::zero(m);
        for i in 0..m {
            for j in 0..m {
                // adj(g)_{ij} = (-1)^{i+j} minor_{ji}
                let minor = minor_det(&self.entries, j, i);
                let signed = if (i + j) % 2 == 0 {
                    minor
                } else {
                    Expr::neg(minor)
                };
                out.entries[i][j] = poly::canonicalize(&Expr::div(signed, det.clone()))?;
            }
        }
        Ok(out)
    }
}

fn det_rec(a: &[Vec<Expr>]) -> Expr {
    let m = a.len();
    // empty minor of a 1x1 matrix
    if m == 0 {
        return Expr::one();
    }
    if m == 1 {
        return a[0][0].clone();
    }
    let mut terms = Vec::with_capacity(m);
    for j in 0..m {
        if a[0][j].is_zero_const() {
            continue;
        }
        let minor = minor_det_slice(a, 0, j);
        let term = Expr::mul2(a[0][j].clone(), minor);
        terms.push(if j % 2 == 0 { term } else { Expr::neg(term) });
    }
    Expr::add(terms)
}

fn minor_det_slice(a: &[Vec<Expr>], row: usize, col: usize) -> Expr {
    let m = a.len();
    let sub: Vec<Vec<Expr>> = (0..m)
        .filter(|&i| i != row)
        .map(|i| {
            (0..m)
                .filter(|&j| j != col)
                .map(|j| a[i][j].clone())
                .collect()
        })
        .collect();
    det_rec(&sub)
}

fn minor_det(a: &[Vec<Expr>], row: usize, col: usize) -> Expr {
    minor_det_slice(a, row, col)
}

/// Vector field on a chart.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub chart: Chart,
    pub comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Chart, comps: Vec<Expr>) -> Result<Self, FormsError> {
        if comps.len() != chart.dim() {
            return Err(FormsError::SizeMismatch);
        }
        Ok(VectorField { chart, comps })
    }

    /// Directional derivative X(h).
    pub fn apply(&self, h: &Expr) -> Expr {
        Expr::add(
            self.chart
                .names
                .iter()
                .zip(&self.comps)
                .map(|(name, comp)| Expr::mul2(comp.clone(), differentiate(h, name)))
                .collect(),
        )
    }
}

/// Smooth map between charts, one expression per target coordinate.
#[derive(Clone, Debug)]
pub struct SmoothMap {
    pub source: Chart,
    pub target: Chart,
    pub comps: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(source: Chart, target: Chart, comps: Vec<Expr>) -> Result<Self, FormsError> {
        if comps.len() != target.dim() {
            return Err(FormsError::SizeMismatch);
        }
        for c in &comps {
            source.check_expr(c, &[])?;
        }
        Ok(SmoothMap {
            source,
            target,
            comps,
        })
    }

    pub fn bindings(&self) -> HashMap<String, Expr> {
        self.target
            .names
            .iter()
            .cloned()
            .zip(self.comps.iter().cloned())
            .collect()
    }
}

/// Sort an index tuple, returning the permutation sign; None on repeats.
fn sort_with_sign(mut idx: Vec<usize>) -> Option<(Vec<usize>, i32)> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    Some((idx, sign))
}

/// Differential form with m-by-m matrix coefficients.
#[derive(Clone, Debug)]
pub struct DiffForm {
    pub chart: Chart,
    pub degree: usize,
    pub m: usize,
    /// Strictly increasing index tuples -> coefficient matrices.
    pub coeffs: BTreeMap<Vec<usize>, MatExpr>,
}

impl DiffForm {
    pub fn zero(chart: Chart, degree: usize, m: usize) -> Self {
        DiffForm {
            chart,
            degree,
            m,
            coeffs: BTreeMap::new(),
        }
    }

    /// Degree-0 form from a matrix of functions.
    pub fn function(chart: Chart, mat: MatExpr) -> Self {
        let m = mat.m;
        let mut f = DiffForm::zero(chart, 0, m);
        f.add_term(&[], mat, 1);
        f
    }

    pub fn scalar_function(chart: Chart, e: Expr) -> Self {
        DiffForm::function(chart, MatExpr::scalar(e))
    }

    /// One-form from per-coordinate coefficient matrices.
    pub fn one_form(chart: Chart, comps: Vec<MatExpr>) -> Result<Self, FormsError> {
        if comps.len() != chart.dim() {
            return Err(FormsError::SizeMismatch);
        }
        let m = comps.first().map_or(1, |c| c.m);
        if comps.iter().any(|c| c.m != m) {
            return Err(FormsError::SizeMismatch);
        }
        let mut f = DiffForm::zero(chart, 1, m);
        for (mu, mat) in comps.into_iter().enumerate() {
            f.add_term(&[mu], mat, 1);
        }
        Ok(f)
    }

    /// The coordinate one-form dx_i.
    pub fn dx(chart: Chart, i: usize) -> Self {
        let mut f = DiffForm::zero(chart, 1, 1);
        f.add_term(&[i], MatExpr::scalar(Expr::one()), 1);
        f
    }

    /// Coefficient matrices of a one-form, one per coordinate.
    pub fn one_form_components(&self) -> Vec<MatExpr> {
        (0..self.chart.dim())
            .map(|mu| {
                self.coeffs
                    .get(&vec![mu])
                    .cloned()
                    .unwrap_or_else(|| MatExpr::zero(self.m))
            })
            .collect()
    }

    fn add_term(&mut self, raw_idx: &[usize], mat: MatExpr, extra_sign: i32) {
        let Some((idx, sign)) = sort_with_sign(raw_idx.to_vec()) else {
            return;
        };
        let signed = if sign * extra_sign < 0 { mat.neg() } else { mat };
        if signed.looks_zero() {
            if !self.coeffs.contains_key(&idx) {
                return;
            }
        }
        match self.coeffs.get_mut(&idx) {
            Some(existing) => {
                let sum = existing.add(&signed).expect("matching sizes");
                if sum.looks_zero() {
                    self.coeffs.remove(&idx);
                } else {
                    *existing = sum;
                }
            }
            None => {
                if !signed.looks_zero() {
                    self.coeffs.insert(idx, signed);
                }
            }
        }
    }

    pub fn add(&self, o: &DiffForm) -> Result<DiffForm, FormsError> {
        if self.chart != o.chart {
            return Err(FormsError::ChartMismatch);
        }
        if self.degree != o.degree || self.m != o.m {
            return Err(FormsError::DegreeMismatch);
        }
        let mut out = self.clone();
        for (idx, mat) in &o.coeffs {
            out.add_term(idx, mat.clone(), 1);
        }
        Ok(out)
    }

    pub fn neg(&self) -> DiffForm {
        let mut out = self.clone();
        for mat in out.coeffs.values_mut() {
            *mat = mat.neg();
        }
        out
    }

    pub fn sub(&self, o: &DiffForm) -> Result<DiffForm, FormsError> {
        self.add(&o.neg())
    }

    pub fn scale(&self, e: &Expr) -> DiffForm {
        let mut out = self.clone();
        for mat in out.coeffs.values_mut() {
            *mat = mat.scale(e);
        }
        out
    }

    /// Wedge product; coefficient matrices multiply in order.
    pub fn wedge(&self, o: &DiffForm) -> Result<DiffForm, FormsError> {
        if self.chart != o.chart {
            return Err(FormsError::ChartMismatch);
        }
        let m = if self.m == 1 { o.m } else { self.m };
        if self.m != 1 && o.m != 1 && self.m != o.m {
            return Err(FormsError::SizeMismatch);
        }
        let mut out = DiffForm::zero(self.chart.clone(), self.degree + o.degree, m);
        for (ia, ma) in &self.coeffs {
            for (ib, mb) in &o.coeffs {
                let mut raw = ia.clone();
                raw.extend(ib.iter().copied());
                let mat = ma.mul_general(mb)?;
                out.add_term(&raw, mat, 1);
            }
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn ext_d(&self) -> DiffForm {
        let mut out = DiffForm::zero(self.chart.clone(), self.degree + 1, self.m);
        for (idx, mat) in &self.coeffs {
            for (mu, name) in self.chart.names.iter().enumerate() {
                let dmat = mat.map(|e| differentiate(e, name));
                if dmat.looks_zero() {
                    continue;
                }
                let mut raw = vec![mu];
                raw.extend(idx.iter().copied());
                out.add_term(&raw, dmat, 1);
            }
        }
        out
    }

    /// Interior product (contraction in the first slot).
    pub fn interior(&self, x: &VectorField) -> Result<DiffForm, FormsError> {
        if self.chart != x.chart {
            return Err(FormsError::ChartMismatch);
        }
        if self.degree == 0 {
            return Err(FormsError::DegreeMismatch);
        }
        let mut out = DiffForm::zero(self.chart.clone(), self.degree - 1, self.m);
        for (idx, mat) in &self.coeffs {
            for (r, &i_r) in idx.iter().enumerate() {
                let comp = &x.comps[i_r];
                if comp.is_zero_const() {
                    continue;
                }
                let rest: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| *s != r)
                    .map(|(_, &v)| v)
                    .collect();
                let sign = if r % 2 == 0 { 1 } else { -1 };
                out.add_term(&rest, mat.scale(comp), sign);
            }
        }
        Ok(out)
    }

    /// Pullback along a smooth map into this form's chart.
    pub fn pullback(&self, map: &SmoothMap) -> Result<DiffForm, FormsError> {
        if self.chart != map.target {
            return Err(FormsError::ChartMismatch);
        }
        let bindings = map.bindings();
        let mut out = DiffForm::zero(map.source.clone(), self.degree, self.m);
        for (idx, mat) in &self.coeffs {
            let base = mat.map(|e| substitute(e, &bindings));
            let mut acc = DiffForm::function(map.source.clone(), base);
            for &i in idx {
                // d(phi_i) expanded on the source chart
                let mut dphi = DiffForm::zero(map.source.clone(), 1, 1);
                for (alpha, name) in map.source.names.iter().enumerate() {
                    let d = differentiate(&map.comps[i], name);
                    if !d.is_zero_const() {
                        dphi.add_term(&[alpha], MatExpr::scalar(d), 1);
                    }
                }
                acc = acc.wedge(&dphi)?;
            }
            for (i2, m2) in acc.coeffs {
                out.add_term(&i2, m2, 1);
            }
        }
        Ok(out)
    }

    /// Trace of the coefficient matrices: a scalar form.
    pub fn trace(&self) -> DiffForm {
        let mut out = DiffForm::zero(self.chart.clone(), self.degree, 1);
        for (idx, mat) in &self.coeffs {
            out.add_term(idx, MatExpr::scalar(mat.trace()), 1);
        }
        out
    }

    /// Decidable zero test over all coefficients.
    pub fn is_zero(&self) -> Result<bool, FormsError> {
        for mat in self.coeffs.values() {
            if !mat.is_zero()? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn equals(&self, o: &DiffForm) -> Result<bool, FormsError> {
        self.sub(o)?.is_zero()
    }

    /// Every coefficient in rational-function normal form; terms whose
    /// matrix proves to be zero drop out entirely.
    pub fn canonical(&self) -> Result<DiffForm, FormsError> {
        let mut out = DiffForm::zero(self.chart.clone(), self.degree, self.m);
        for (idx, mat) in &self.coeffs {
            let c = mat.canonical()?;
            if !c.is_zero()? {
                out.coeffs.insert(idx.clone(), c);
            }
        }
        Ok(out)
    }
}

/// Curvature F = dA + A ^ A of a matrix-valued connection one-form.
pub fn curvature(a: &DiffForm) -> Result<DiffForm, FormsError> {
    if a.degree != 1 {
        return Err(FormsError::DegreeMismatch);
    }
    a.ext_d().add(&a.wedge(a)?)
}

/// Gauge transformation A -> g A g^{-1} + g d(g^{-1}).
///
/// The inhomogeneous term is g d(g^{-1}) = -dg g^{-1}: with F = dA + A ^ A
/// this is the unique sign for which the curvature conjugates, F -> g F g^{-1},
/// and for which the pure-gauge connection (A = 0) is flat.
pub fn gauge_transform(a: &DiffForm, g: &MatExpr) -> Result<DiffForm, FormsError> {
    if a.degree != 1 {
        return Err(FormsError::DegreeMismatch);
    }
    if g.m != a.m {
        return Err(FormsError::SizeMismatch);
    }
    let g_inv = g.inverse()?;
    let mut out = DiffForm::zero(a.chart.clone(), 1, a.m);
    for (idx, mat) in &a.coeffs {
        let conj = g.matmul(mat)?.matmul(&g_inv)?;
        out.add_term(idx, conj, 1);
    }
    for (mu, name) in a.chart.names.iter().enumerate() {
        let dg = g.map(|e| differentiate(e, name));
        let term = dg.matmul(&g_inv)?.neg();
        out.add_term(&[mu], term, 1);
    }
    Ok(out)
}

/// Conjugation g R g^{-1} of each coefficient; how curvature transforms.
pub fn conjugate_form(r: &DiffForm, g: &MatExpr) -> Result<DiffForm, FormsError> {
    if g.m != r.m {
        return Err(FormsError::SizeMismatch);
    }
    let g_inv = g.inverse()?;
    let mut out = DiffForm::zero(r.chart.clone(), r.degree, r.m);
    for (idx, mat) in &r.coeffs {
        out.add_term(idx, g.matmul(mat)?.matmul(&g_inv)?, 1);
    }
    Ok(out)
}

/// tr(A ^ dA + (2/3) A ^ A ^ A).
pub fn chern_simons(a: &DiffForm) -> Result<DiffForm, FormsError> {
    if a.degree != 1 {
        return Err(FormsError::DegreeMismatch);
    }
    let ada = a.wedge(&a.ext_d())?;
    let aaa = a.wedge(&a.wedge(a)?)?;
    let total = ada.add(&aaa.scale(&Expr::ratio(2, 3)))?;
    Ok(total.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;
    use crate::expr::poly::exprs_equal;

    fn chart_xy() -> Chart {
        Chart::new(vec!["x".into(), "y".into()]).unwrap()
    }

    fn chart_xyz() -> Chart {
        Chart::new(vec!["x".into(), "y".into(), "z".into()]).unwrap()
    }

    fn sf(c: &Chart, src: &str) -> DiffForm {
        DiffForm::scalar_function(c.clone(), parse(src).unwrap())
    }

    #[test]
    fn d_squared_is_zero() {
        let c = chart_xyz();
        let f = sf(&c, "x^2*y + sin(z)*x");
        let ddf = f.ext_d().ext_d();
        assert!(ddf.is_zero().unwrap());
    }

    #[test]
    fn wedge_anticommutes_for_scalar_one_forms() {
        let c = chart_xy();
        let a = sf(&c, "x").ext_d();
        let b = sf(&c, "y^2").ext_d();
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        assert!(ab.add(&ba).unwrap().is_zero().unwrap());
        // dx ^ dx = 0
        assert!(a.wedge(&a).unwrap().is_zero().unwrap());
    }

    #[test]
    fn interior_of_area_form() {
        let c = chart_xy();
        // omega = dx ^ dy, X = x d/dx + y d/dy: iota_X omega = x dy - y dx
        let omega = DiffForm::dx(c.clone(), 0)
            .wedge(&DiffForm::dx(c.clone(), 1))
            .unwrap();
        let x = VectorField::new(c.clone(), vec![parse("x").unwrap(), parse("y").unwrap()])
            .unwrap();
        let got = omega.interior(&x).unwrap();
        let mut want = DiffForm::zero(c.clone(), 1, 1);
        want.add_term(&[1], MatExpr::scalar(parse("x").unwrap()), 1);
        want.add_term(&[0], MatExpr::scalar(parse("-y").unwrap()), 1);
        assert!(got.equals(&want).unwrap());
    }

    #[test]
    fn pullback_commutes_with_d() {
        // phi: R^2 -> R^2, (u,v) -> (u*v, u^2 - v)
        let src = Chart::new(vec!["u".into(), "v".into()]).unwrap();
        let tgt = chart_xy();
        let phi = SmoothMap::new(
            src,
            tgt.clone(),
            vec![parse("u*v").unwrap(), parse("u^2 - v").unwrap()],
        )
        .unwrap();
        let omega = sf(&tgt, "x^2*y").ext_d();
        let lhs = omega.pullback(&phi).unwrap().ext_d();
        let rhs = sf(&tgt, "x^2*y").ext_d().ext_d().pullback(&phi).unwrap();
        // d(phi* omega) = phi*(d omega); here d omega is d of a 1-form
        let rhs2 = omega.ext_d().pullback(&phi).unwrap();
        assert!(lhs.equals(&rhs2).unwrap());
        assert!(rhs.is_zero().unwrap());
    }

    #[test]
    fn pullback_respects_wedge() {
        let src = Chart::new(vec!["u".into(), "v".into()]).unwrap();
        let tgt = chart_xy();
        let phi = SmoothMap::new(
            src,
            tgt.clone(),
            vec![parse("u + v").unwrap(), parse("u*v").unwrap()],
        )
        .unwrap();
        let a = sf(&tgt, "x").ext_d();
        let b = sf(&tgt, "y").ext_d();
        let lhs = a.wedge(&b).unwrap().pullback(&phi).unwrap();
        let rhs = a
            .pullback(&phi)
            .unwrap()
            .wedge(&b.pullback(&phi).unwrap())
            .unwrap();
        assert!(lhs.equals(&rhs).unwrap());
    }

    #[test]
    fn matrix_wedge_is_commutator_shaped() {
        // For a matrix one-form A = M dx + N dy, A^A = (MN - NM) dx^dy.
        let c = chart_xy();
        let m_mat = MatExpr::from_entries(vec![
            vec![Expr::zero(), parse("x").unwrap()],
            vec![Expr::one(), Expr::zero()],
        ])
        .unwrap();
        let n_mat = MatExpr::from_entries(vec![
            vec![parse("y").unwrap(), Expr::zero()],
            vec![Expr::zero(), Expr::one()],
        ])
        .unwrap();
        let a = DiffForm::one_form(c.clone(), vec![m_mat.clone(), n_mat.clone()]).unwrap();
        let aa = a.wedge(&a).unwrap();
        let mn = m_mat.matmul(&n_mat).unwrap();
        let nm = n_mat.matmul(&m_mat).unwrap();
        let want_mat = mn.add(&nm.neg()).unwrap();
        let mut want = DiffForm::zero(c.clone(), 2, 2);
        want.add_term(&[0, 1], want_mat, 1);
        assert!(aa.equals(&want).unwrap());
    }

    #[test]
    fn matrix_inverse_adjugate() {
        let g = MatExpr::from_entries(vec![
            vec![Expr::one(), parse("x").unwrap()],
            vec![Expr::zero(), Expr::one()],
        ])
        .unwrap();
        let g_inv = g.inverse().unwrap();
        let prod = g.matmul(&g_inv).unwrap();
        assert!(prod.add(&MatExpr::identity(2).neg()).unwrap().is_zero().unwrap());
        let sing = MatExpr::from_entries(vec![
            vec![Expr::one(), Expr::one()],
            vec![Expr::one(), Expr::one()],
        ])
        .unwrap();
        assert_eq!(sing.inverse().unwrap_err(), FormsError::Singular);
        // 1x1 case rests on the empty-minor convention det [] = 1
        let one = MatExpr::from_entries(vec![vec![parse("exp(x)").unwrap()]]).unwrap();
        let inv = one.inverse().unwrap();
        assert!(exprs_equal(
            &inv.entries[0][0],
            &Expr::div(Expr::one(), parse("exp(x)").unwrap()),
        )
        .unwrap());
    }

    #[test]
    fn bianchi_identity() {
        // dF + A^F - F^A = 0 for a polynomial su(2)-like connection
        let c = chart_xy();
        let a0 = MatExpr::from_entries(vec![
            vec![Expr::zero(), parse("x*y").unwrap()],
            vec![parse("-x*y").unwrap(), Expr::zero()],
        ])
        .unwrap();
        let a1 = MatExpr::from_entries(vec![
            vec![parse("x^2").unwrap(), parse("y").unwrap()],
            vec![parse("y").unwrap(), parse("-x^2").unwrap()],
        ])
        .unwrap();
        let a = DiffForm::one_form(c.clone(), vec![a0, a1]).unwrap();
        let f = curvature(&a).unwrap();
        let residual = f
            .ext_d()
            .add(&a.wedge(&f).unwrap())
            .unwrap()
            .sub(&f.wedge(&a).unwrap())
            .unwrap();
        assert!(residual.is_zero().unwrap());
    }

    #[test]
    fn gauge_transform_conjugates_curvature() {
        let c = chart_xy();
        let a0 = MatExpr::from_entries(vec![
            vec![Expr::zero(), parse("x").unwrap()],
            vec![parse("y").unwrap(), Expr::zero()],
        ])
        .unwrap();
        let a1 = MatExpr::from_entries(vec![
            vec![parse("y^2").unwrap(), Expr::zero()],
            vec![Expr::zero(), parse("x^2").unwrap()],
        ])
        .unwrap();
        let a = DiffForm::one_form(c.clone(), vec![a0, a1]).unwrap();
        let g = MatExpr::from_entries(vec![
            vec![Expr::one(), parse("x*y").unwrap()],
            vec![Expr::zero(), Expr::one()],
        ])
        .unwrap();
        let a_g = gauge_transform(&a, &g).unwrap();
        let lhs = curvature(&a_g).unwrap();
        let rhs = conjugate_form(&curvature(&a).unwrap(), &g).unwrap();
        assert!(lhs.equals(&rhs).unwrap());
    }

    #[test]
    fn chern_simons_descends_to_tr_ff() {
        // dQ3(A) = tr(F ^ F) for A on a 4-coordinate chart
        let c = Chart::new(vec!["x".into(), "y".into(), "z".into(), "w".into()]).unwrap();
        let a0 = MatExpr::from_entries(vec![
            vec![Expr::zero(), parse("x*w").unwrap()],
            vec![parse("-x*w").unwrap(), Expr::zero()],
        ])
        .unwrap();
        let a1 = MatExpr::from_entries(vec![
            vec![parse("z").unwrap(), parse("y").unwrap()],
            vec![parse("y").unwrap(), parse("-z").unwrap()],
        ])
        .unwrap();
        let a2 = MatExpr::from_entries(vec![
            vec![Expr::zero(), parse("w^2").unwrap()],
            vec![parse("x").unwrap(), Expr::zero()],
        ])
        .unwrap();
        let a3 = MatExpr::zero(2);
        let a = DiffForm::one_form(c.clone(), vec![a0, a1, a2, a3]).unwrap();
        let q3 = chern_simons(&a).unwrap();
        let f = curvature(&a).unwrap();
        let tr_ff = f.wedge(&f).unwrap().trace();
        assert!(q3.ext_d().equals(&tr_ff).unwrap());
    }
}
