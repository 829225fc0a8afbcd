//! Canonical rational-function normal form with a decidable zero test.
//!
//! Expressions lower to a quotient of multivariate polynomials over the
//! Gaussian rationals. The denominator is made monic in graded-lex order and
//! the pair gcd-free, so two expressions are equal as rational functions iff
//! their canonical forms are structurally identical.
//!
//! Function applications (`sin`, `cos`, ...) are not polynomial nodes. The
//! strict entry point rejects them; the extended one treats each distinct
//! application as an opaque atom, which is sound for *proving* an expression
//! zero (a formal zero in the atoms is a zero of the function), and is what
//! the geometry modules use after differentiation has already been performed.

use super::{Expr, UnaryFn};
use crate::scalar::GaussQ;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum CanonError {
    /// A function application reached the strict polynomial canonicalizer.
    NonPolynomial(String),
    /// A denominator is identically zero.
    DivisionByZero,
}

impl fmt::Display for CanonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonError::NonPolynomial(what) => {
                write!(f, "non-polynomial node encountered: {what}")
            }
            CanonError::DivisionByZero => write!(f, "division by an identically zero denominator"),
        }
    }
}

impl std::error::Error for CanonError {}

/// Exponent vector; ordered graded-lex (total degree, then left-to-right).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn unit(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    fn mul(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn divides(&self, o: &Mono) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a <= b)
    }

    fn div(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.total().cmp(&o.total()).then_with(|| self.0.cmp(&o.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

/// Multivariate polynomial with Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct MPoly {
    pub nvars: usize,
    pub terms: BTreeMap<Mono, GaussQ>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: GaussQ) -> Self {
        let mut p = MPoly::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Mono::unit(nvars), c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        MPoly::constant(nvars, GaussQ::one())
    }

    pub fn var(idx: usize, nvars: usize) -> Self {
        let mut m = Mono::unit(nvars);
        m.0[idx] = 1;
        let mut p = MPoly::zero(nvars);
        p.terms.insert(m, GaussQ::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::unit(self.nvars))
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().total() == 0)
    }

    fn insert_term(&mut self, m: Mono, c: GaussQ) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        debug_assert_eq!(self.nvars, o.nvars);
        let mut out = MPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.insert_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussQ) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut acc = MPoly::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Leading (monomial, coefficient) in graded-lex order.
    pub fn leading(&self) -> Option<(&Mono, &GaussQ)> {
        self.terms.iter().next_back()
    }

    /// Scale so the graded-lex leading coefficient is 1.
    fn monic(&self) -> MPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                let inv = c.inv().expect("leading coefficient is nonzero");
                self.scale(&inv)
            }
        }
    }

    /// Exact division; `None` unless `d` divides `self` exactly.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        debug_assert_eq!(self.nvars, d.nvars);
        let (dm, dc) = d.leading()?;
        let dc_inv = dc.inv().expect("nonzero leading coefficient");
        let mut rem = self.clone();
        let mut quo = MPoly::zero(self.nvars);
        while let Some((rm, rc)) = rem.leading() {
            if !dm.divides(rm) {
                return None;
            }
            let qm = rm.div(dm);
            let qc = rc * &dc_inv;
            let mut t = MPoly::zero(self.nvars);
            t.terms.insert(qm, qc);
            rem = rem.sub(&t.mul(d));
            quo = quo.add(&t);
        }
        Some(quo)
    }

    fn deg_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|m| m.0[v]).max().unwrap_or(0)
    }

    /// Highest variable index that actually occurs, if any.
    fn top_var(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate().rev() {
                if e > 0 {
                    best = Some(best.map_or(i, |b| b.max(i)));
                    break;
                }
            }
        }
        best
    }

    /// Coefficients of powers of variable `v`, each with `v` zeroed out.
    fn to_uni(&self, v: usize) -> Vec<MPoly> {
        let d = self.deg_in(v) as usize;
        let mut out = vec![MPoly::zero(self.nvars); d + 1];
        for (m, c) in &self.terms {
            let k = m.0[v] as usize;
            let mut m2 = m.clone();
            m2.0[v] = 0;
            out[k].insert_term(m2, c.clone());
        }
        out
    }

    fn from_uni(coeffs: &[MPoly], v: usize, nvars: usize) -> MPoly {
        let mut out = MPoly::zero(nvars);
        for (k, c) in coeffs.iter().enumerate() {
            for (m, q) in &c.terms {
                let mut m2 = m.clone();
                m2.0[v] += k as u32;
                out.insert_term(m2, q.clone());
            }
        }
        out
    }
}

fn uni_deg(u: &[MPoly]) -> Option<usize> {
    u.iter().rposition(|c| !c.is_zero())
}

/// Pseudo-remainder of f by g as univariate polynomials in `v`.
fn pseudo_rem(f: &MPoly, g: &MPoly, v: usize) -> MPoly {
    let nvars = f.nvars;
    let g_uni = g.to_uni(v);
    let dg = uni_deg(&g_uni).expect("pseudo_rem by zero");
    let lg = g_uni[dg].clone();
    let mut r = f.to_uni(v);
    loop {
        let Some(dr) = uni_deg(&r) else {
            return MPoly::zero(nvars);
        };
        if dr < dg {
            return MPoly::from_uni(&r, v, nvars);
        }
        let lr = r[dr].clone();
        let shift = dr - dg;
        // r <- lg*r - lr * x^shift * g ; the degree-dr terms cancel.
        let mut next = vec![MPoly::zero(nvars); dr];
        #[allow(clippy::needless_range_loop)]
        for k in 0..dr {
            let mut t = lg.mul(&r[k]);
            if k >= shift && k - shift <= dg {
                t = t.sub(&lr.mul(&g_uni[k - shift]));
            }
            next[k] = t;
        }
        r = next;
    }
}

/// Content of `p` viewed as a univariate polynomial in `v`: the gcd of its
/// coefficient polynomials.
fn content_in(p: &MPoly, v: usize) -> MPoly {
    let mut acc = MPoly::zero(p.nvars);
    for c in p.to_uni(v) {
        if c.is_zero() {
            continue;
        }
        acc = gcd_mpoly(&acc, &c);
        if acc.is_one() {
            return acc;
        }
    }
    acc
}

fn primitive_in(p: &MPoly, content: &MPoly) -> MPoly {
    if p.is_zero() {
        return p.clone();
    }
    p.div_exact(content)
        .expect("content divides every coefficient")
}

/// Monic gcd via primitive polynomial remainder sequences.
pub fn gcd_mpoly(a: &MPoly, b: &MPoly) -> MPoly {
    debug_assert_eq!(a.nvars, b.nvars);
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return MPoly::one(a.nvars);
    }
    let v = a
        .top_var()
        .into_iter()
        .chain(b.top_var())
        .max()
        .expect("non-constant polynomials have a top variable");

    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let cont = gcd_mpoly(&ca, &cb);
    let mut f = primitive_in(a, &ca);
    let mut g = primitive_in(b, &cb);
    if f.deg_in(v) < g.deg_in(v) {
        std::mem::swap(&mut f, &mut g);
    }
    while !g.is_zero() {
        let r = pseudo_rem(&f, &g, v);
        f = g;
        g = if r.is_zero() {
            r
        } else {
            let cr = content_in(&r, v);
            primitive_in(&r, &cr)
        };
    }
    cont.mul(&f).monic()
}

/// Rational function in canonical form: gcd(num, den) = 1 and den monic.
#[derive(Clone, PartialEq, Debug)]
pub struct RatFn {
    pub num: MPoly,
    pub den: MPoly,
}

impl RatFn {
    pub fn from_poly(p: MPoly) -> Self {
        let nvars = p.nvars;
        RatFn {
            num: p,
            den: MPoly::one(nvars),
        }
    }

    pub fn zero(nvars: usize) -> Self {
        RatFn::from_poly(MPoly::zero(nvars))
    }

    pub fn constant(nvars: usize, c: GaussQ) -> Self {
        RatFn::from_poly(MPoly::constant(nvars, c))
    }

    pub fn var(idx: usize, nvars: usize) -> Self {
        RatFn::from_poly(MPoly::var(idx, nvars))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn normalized(num: MPoly, den: MPoly) -> Result<Self, CanonError> {
        if den.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        if num.is_zero() {
            let nvars = num.nvars;
            return Ok(RatFn {
                num,
                den: MPoly::one(nvars),
            });
        }
        let g = gcd_mpoly(&num, &den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading().expect("nonzero denominator").1.clone();
        if !lc.is_one() {
            let inv = lc.inv().expect("nonzero leading coefficient");
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Ok(RatFn { num, den })
    }

    pub fn add(&self, o: &RatFn) -> Result<RatFn, CanonError> {
        RatFn::normalized(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }

    pub fn sub(&self, o: &RatFn) -> Result<RatFn, CanonError> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, o: &RatFn) -> Result<RatFn, CanonError> {
        RatFn::normalized(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &RatFn) -> Result<RatFn, CanonError> {
        if o.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        RatFn::normalized(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn inv(&self) -> Result<RatFn, CanonError> {
        if self.is_zero() {
            return Err(CanonError::DivisionByZero);
        }
        RatFn::normalized(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, k: i64) -> Result<RatFn, CanonError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = RatFn::from_poly(MPoly::one(self.num.nvars));
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }
}

/// Variable table for a lowering: named variables first (sorted), then
/// opaque function atoms (sorted by their canonical key).
pub struct Lowering {
    pub vars: Vec<String>,
    pub atoms: Vec<(UnaryFn, Expr)>,
    atom_index: HashMap<String, usize>,
}

impl Lowering {
    pub fn nvars(&self) -> usize {
        self.vars.len() + self.atoms.len()
    }

    fn var_index(&self, name: &str) -> usize {
        self.vars.binary_search_by(|v| v.as_str().cmp(name)).unwrap()
    }

    fn atom_slot(&self, key: &str) -> usize {
        self.vars.len() + self.atom_index[key]
    }

    /// The expression a variable slot stands for.
    pub fn slot_expr(&self, idx: usize) -> Expr {
        if idx < self.vars.len() {
            Expr::var(&self.vars[idx])
        } else {
            let (f, arg) = &self.atoms[idx - self.vars.len()];
            Expr::func(*f, arg.clone())
        }
    }
}

fn atom_key(f: UnaryFn, arg: &Expr) -> Result<String, CanonError> {
    // Key on the canonical form of the argument so sin(q+q) and sin(2*q)
    // collapse to one atom.
    let canon_arg = canonicalize(arg)?;
    Ok(format!("{}({})", f.name(), canon_arg))
}

fn collect_atoms(
    e: &Expr,
    atoms: &mut BTreeMap<String, (UnaryFn, Expr)>,
) -> Result<(), CanonError> {
    match e {
        Expr::Var(_) | Expr::Const(_) => Ok(()),
        Expr::Sum(ts) | Expr::Prod(ts) => {
            for t in ts {
                collect_atoms(t, atoms)?;
            }
            Ok(())
        }
        Expr::Pow(b, _) => collect_atoms(b, atoms),
        Expr::Quot(a, b) => {
            collect_atoms(a, atoms)?;
            collect_atoms(b, atoms)
        }
        Expr::Func(f, arg) => {
            let key = atom_key(*f, arg)?;
            atoms.entry(key).or_insert_with(|| {
                let canon_arg = canonicalize(arg).expect("atom key canonicalized the argument");
                (*f, canon_arg)
            });
            Ok(())
        }
    }
}

fn build_lowering(e: &Expr, strict: bool) -> Result<Lowering, CanonError> {
    if strict {
        if let Some(node) = first_func(e) {
            return Err(CanonError::NonPolynomial(node));
        }
    }
    let mut vars: Vec<String> = e.variables().into_iter().collect();
    vars.sort();
    let mut atoms = BTreeMap::new();
    collect_atoms(e, &mut atoms)?;
    let atom_index: HashMap<String, usize> = atoms
        .keys()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();
    Ok(Lowering {
        vars,
        atoms: atoms.into_values().collect(),
        atom_index,
    })
}

fn first_func(e: &Expr) -> Option<String> {
    match e {
        Expr::Func(f, a) => Some(format!("{}({})", f.name(), a)),
        Expr::Var(_) | Expr::Const(_) => None,
        Expr::Sum(ts) | Expr::Prod(ts) => ts.iter().find_map(first_func),
        Expr::Pow(b, _) => first_func(b),
        Expr::Quot(a, b) => first_func(a).or_else(|| first_func(b)),
    }
}

fn lower(e: &Expr, lw: &Lowering) -> Result<RatFn, CanonError> {
    let n = lw.nvars();
    match e {
        Expr::Var(v) => Ok(RatFn::var(lw.var_index(v), n)),
        Expr::Const(c) => Ok(RatFn::constant(n, c.clone())),
        Expr::Sum(ts) => {
            let mut acc = RatFn::zero(n);
            for t in ts {
                acc = acc.add(&lower(t, lw)?)?;
            }
            Ok(acc)
        }
        Expr::Prod(fs) => {
            let mut acc = RatFn::constant(n, GaussQ::one());
            for t in fs {
                acc = acc.mul(&lower(t, lw)?)?;
            }
            Ok(acc)
        }
        Expr::Pow(b, k) => lower(b, lw)?.pow(*k),
        Expr::Quot(a, b) => lower(a, lw)?.div(&lower(b, lw)?),
        Expr::Func(f, arg) => {
            let key = atom_key(*f, arg)?;
            Ok(RatFn::var(lw.atom_slot(&key), n))
        }
    }
}

fn mono_to_expr(m: &Mono, c: &GaussQ, lw: &Lowering) -> Expr {
    let mut factors = vec![Expr::Const(c.clone())];
    for (i, &e) in m.0.iter().enumerate() {
        if e > 0 {
            factors.push(Expr::pow(lw.slot_expr(i), e as i64));
        }
    }
    Expr::mul(factors)
}

fn poly_to_expr(p: &MPoly, lw: &Lowering) -> Expr {
    if p.is_zero() {
        return Expr::zero();
    }
    // Descending graded-lex: highest-degree term first.
    Expr::add(
        p.terms
            .iter()
            .rev()
            .map(|(m, c)| mono_to_expr(m, c, lw))
            .collect(),
    )
}

fn ratfn_to_expr(r: &RatFn, lw: &Lowering) -> Expr {
    let num = poly_to_expr(&r.num, lw);
    if r.den.is_one() {
        num
    } else {
        Expr::div(num, poly_to_expr(&r.den, lw))
    }
}

fn canon_with(e: &Expr, strict: bool) -> Result<Expr, CanonError> {
    let lw = build_lowering(e, strict)?;
    let r = lower(e, &lw)?;
    Ok(ratfn_to_expr(&r, &lw))
}

/// Canonical form for polynomial / rational expressions. Function
/// applications are rejected.
pub fn canonicalize_poly(e: &Expr) -> Result<Expr, CanonError> {
    canon_with(e, true)
}

/// Canonical form treating distinct function applications as opaque atoms.
pub fn canonicalize(e: &Expr) -> Result<Expr, CanonError> {
    canon_with(e, false)
}

/// Decidable zero test as a rational function (atoms allowed).
pub fn is_zero(e: &Expr) -> Result<bool, CanonError> {
    let lw = build_lowering(e, false)?;
    Ok(lower(e, &lw)?.is_zero())
}

/// Equality as rational functions.
pub fn exprs_equal(a: &Expr, b: &Expr) -> Result<bool, CanonError> {
    is_zero(&Expr::sub(a.clone(), b.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;

    fn canon(src: &str) -> String {
        canonicalize(&parse(src).unwrap()).unwrap().to_string()
    }

    #[test]
    fn binomial_identity() {
        assert_eq!(canon("(q+p)^2 - q^2 - 2*q*p - p^2"), "0");
    }

    #[test]
    fn rational_cancellation() {
        assert_eq!(canon("(x^2 - 1)/(x - 1)"), "x + 1");
        assert_eq!(canon("(x^2 - y^2)/(x + y)"), "x - y");
        assert_eq!(canon("1/x + 1/y - (x+y)/(x*y)"), "0");
    }

    #[test]
    fn monic_denominator() {
        // 1/(2x - 2) -> (1/2)/(x - 1)
        let e = canonicalize(&parse("1/(2*x - 2)").unwrap()).unwrap();
        assert_eq!(e.to_string(), "1/2/(x - 1)");
    }

    #[test]
    fn strict_rejects_functions() {
        let e = parse("sin(q) + q").unwrap();
        match canonicalize_poly(&e) {
            Err(CanonError::NonPolynomial(msg)) => assert!(msg.contains("sin")),
            other => panic!("expected NonPolynomial, got {other:?}"),
        }
    }

    #[test]
    fn atoms_prove_zero() {
        // d/dq [sin(q)^2] - 2 sin(q) cos(q) = 0 formally in the atoms
        let e = parse("sin(q)^2").unwrap();
        let de = crate::expr::calculus::differentiate(&e, "q");
        let want = parse("2*sin(q)*cos(q)").unwrap();
        assert!(exprs_equal(&de, &want).unwrap());
    }

    #[test]
    fn atom_args_canonicalized() {
        assert!(exprs_equal(
            &parse("sin(q + q)").unwrap(),
            &parse("sin(2*q)").unwrap()
        )
        .unwrap());
    }

    #[test]
    fn division_by_zero_detected() {
        let e = parse("1/(x - x)").unwrap();
        assert_eq!(is_zero(&e), Err(CanonError::DivisionByZero));
    }

    #[test]
    fn gcd_multivariate() {
        // gcd((x+y)^2 (x-y), (x+y)(x-y)^2) = (x+y)(x-y) up to normalization
        let a = parse("(x+y)^2*(x-y)").unwrap();
        let b = parse("(x+y)*(x-y)^2").unwrap();
        let lw = build_lowering(&Expr::add2(a.clone(), b.clone()), true).unwrap();
        let pa = lower(&a, &lw).unwrap().num;
        let pb = lower(&b, &lw).unwrap().num;
        let g = gcd_mpoly(&pa, &pb);
        let want = lower(&parse("(x+y)*(x-y)").unwrap(), &lw).unwrap().num;
        assert_eq!(g, want.monic());
    }

    #[test]
    fn imaginary_coefficients() {
        assert_eq!(canon("(q + i*p)*(q - i*p) - q^2 - p^2"), "0");
    }

    #[test]
    fn canonical_ordering_deterministic() {
        // descending graded-lex with names sorted: p before q
        assert_eq!(canon("q + p^2 + 1"), "p^2 + q + 1");
    }
}
