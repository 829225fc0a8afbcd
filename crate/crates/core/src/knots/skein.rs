//! Skein-relation evaluator.
//!
//! One generic invariant is computed by unknotting: pick a crossing that the
//! descending walk first meets on its under-strand, and resolve the relation
//! x*P(L+) + y*P(L-) = z*P(L0) for the diagram at hand. Switching the pivot
//! strictly shrinks the set of such crossings and smoothing removes one
//! crossing, so the recursion terminates on descending diagrams, which are
//! unlinks: P = ((x+y)/z)^(components-1). Everything else (Conway, Jones,
//! HOMFLY) is a substitution instance of the generic value.

use super::{skein_triple, smooth_crossing, switch_crossing, KnotError, LinkDiagram};
use crate::expr::calculus::substitute;
use crate::expr::poly::canonicalize;
use crate::expr::Expr;
use crate::scalar::{rat_to_f64, GaussQ};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Crossing budget for the exponential-time evaluator.
pub const MAX_CROSSINGS: usize = 14;

/// Which reading of the generic invariant to return.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkeinSpec {
    Generic,
    Conway,
    Jones,
    Homfly,
}

impl FromStr for SkeinSpec {
    type Err = KnotError;

    fn from_str(s: &str) -> Result<Self, KnotError> {
        Ok(match s {
            "generic" => SkeinSpec::Generic,
            "conway" => SkeinSpec::Conway,
            "jones" => SkeinSpec::Jones,
            "homfly" => SkeinSpec::Homfly,
            other => return Err(KnotError::Parse(format!("unknown invariant {other:?}"))),
        })
    }
}

/// Laurent polynomial in one variable over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laurent1 {
    pub var: String,
    /// exponent -> nonzero coefficient
    pub coeffs: BTreeMap<i64, BigRational>,
}

impl Laurent1 {
    pub fn zero(var: &str) -> Self {
        Laurent1 {
            var: var.to_string(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn monomial(var: &str, exp: i64, coeff: BigRational) -> Self {
        let mut l = Laurent1::zero(var);
        if !coeff.is_zero() {
            l.coeffs.insert(exp, coeff);
        }
        l
    }

    pub fn one(var: &str) -> Self {
        Laurent1::monomial(var, 0, BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn insert_add(&mut self, exp: i64, c: &BigRational) {
        let v = self.coeffs.entry(exp).or_insert_with(BigRational::zero);
        *v += c;
        if v.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn add(&self, o: &Laurent1) -> Laurent1 {
        assert_eq!(self.var, o.var);
        let mut out = self.clone();
        for (&e, c) in &o.coeffs {
            out.insert_add(e, c);
        }
        out
    }

    pub fn neg(&self) -> Laurent1 {
        Laurent1 {
            var: self.var.clone(),
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, -c)).collect(),
        }
    }

    pub fn sub(&self, o: &Laurent1) -> Laurent1 {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Laurent1) -> Laurent1 {
        assert_eq!(self.var, o.var);
        let mut out = Laurent1::zero(&self.var);
        for (&e1, c1) in &self.coeffs {
            for (&e2, c2) in &o.coeffs {
                out.insert_add(e1 + e2, &(c1 * c2));
            }
        }
        out
    }

    /// Multiply by var^k.
    pub fn shift(&self, k: i64) -> Laurent1 {
        Laurent1 {
            var: self.var.clone(),
            coeffs: self.coeffs.iter().map(|(&e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Laurent1 {
        let mut acc = Laurent1::one(&self.var);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&e, c)| x.powi(e as i32) * rat_to_f64(c))
            .sum()
    }

    /// Render with exponents divided by `denom` and the variable renamed;
    /// fractional exponents print as "v^p/q". Terms ascend by exponent.
    pub fn format_scaled(&self, out_var: &str, denom: i64) -> String {
        if self.coeffs.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (&e, c) in &self.coeffs {
            let parts = if e == 0 {
                Vec::new()
            } else {
                vec![exp_part(out_var, e, denom)]
            };
            push_term(&mut out, c, &parts);
        }
        out
    }
}

/// Laurent polynomial in two variables over the rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laurent2 {
    pub vars: (String, String),
    /// (exponent of vars.0, exponent of vars.1) -> nonzero coefficient
    pub coeffs: BTreeMap<(i64, i64), BigRational>,
}

impl Laurent2 {
    pub fn zero(v0: &str, v1: &str) -> Self {
        Laurent2 {
            vars: (v0.to_string(), v1.to_string()),
            coeffs: BTreeMap::new(),
        }
    }

    fn insert_add(&mut self, exp: (i64, i64), c: &BigRational) {
        let v = self.coeffs.entry(exp).or_insert_with(BigRational::zero);
        *v += c;
        if v.is_zero() {
            self.coeffs.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl fmt::Display for Laurent2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (&(ea, eb), c) in &self.coeffs {
            let mut parts = Vec::new();
            if ea != 0 {
                parts.push(exp_part(&self.vars.0, ea, 1));
            }
            if eb != 0 {
                parts.push(exp_part(&self.vars.1, eb, 1));
            }
            push_term(&mut out, c, &parts);
        }
        write!(f, "{out}")
    }
}

fn exp_part(var: &str, e: i64, denom: i64) -> String {
    if e % denom == 0 {
        let k = e / denom;
        if k == 1 {
            var.to_string()
        } else {
            format!("{var}^{k}")
        }
    } else {
        format!("{var}^{e}/{denom}")
    }
}

fn push_term(out: &mut String, coeff: &BigRational, parts: &[String]) {
    let neg = coeff.is_negative();
    if out.is_empty() {
        if neg {
            out.push('-');
        }
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    let abs = coeff.abs();
    if parts.is_empty() {
        out.push_str(&abs.to_string());
        return;
    }
    let mut first = true;
    if !abs.is_one() {
        out.push_str(&abs.to_string());
        first = false;
    }
    for p in parts {
        if !first {
            out.push('*');
        }
        out.push_str(p);
        first = false;
    }
}

/// A skein invariant in the representation its specialization lives in.
#[derive(Clone, Debug, PartialEq)]
pub enum SkeinValue {
    /// Rational function in x, y, z.
    Generic(Expr),
    /// Polynomial in z.
    Conway(Laurent1),
    /// Laurent polynomial in s = t^(1/2); prints in half-powers of t.
    Jones(Laurent1),
    /// Laurent polynomial in a and z.
    Homfly(Laurent2),
}

impl fmt::Display for SkeinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkeinValue::Generic(e) => write!(f, "{e}"),
            SkeinValue::Conway(l) => write!(f, "{}", l.format_scaled("z", 1)),
            SkeinValue::Jones(l) => write!(f, "{}", l.format_scaled("t", 2)),
            SkeinValue::Homfly(l) => write!(f, "{l}"),
        }
    }
}

fn unlink_value(total_components: usize) -> Expr {
    let u = Expr::div(
        Expr::add2(Expr::var("x"), Expr::var("y")),
        Expr::var("z"),
    );
    Expr::pow(u, total_components as i64 - 1)
}

fn diagram_key(d: &LinkDiagram) -> String {
    let mut cs: Vec<(i8, [usize; 4])> = d.crossings.iter().map(|c| (c.sign, c.arcs)).collect();
    cs.sort_unstable();
    format!("{cs:?}|{}", d.free_loops)
}

/// x*P+ + y*P- = z*P0 resolved for the diagram whose sign at the pivot is
/// `sign`; `switched` and `zero` are the other two values.
fn resolve(sign: i8, switched: &Expr, zero: &Expr) -> Result<Expr, KnotError> {
    let (num_var, den_var) = if sign > 0 { ("y", "x") } else { ("x", "y") };
    let e = Expr::div(
        Expr::sub(
            Expr::mul2(Expr::var("z"), zero.clone()),
            Expr::mul2(Expr::var(num_var), switched.clone()),
        ),
        Expr::var(den_var),
    );
    Ok(canonicalize(&e)?)
}

fn generic_rec(d: &LinkDiagram, memo: &mut HashMap<String, Expr>) -> Result<Expr, KnotError> {
    let key = diagram_key(d);
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let bads = d.bad_crossings();
    let val = match bads.first() {
        None => canonicalize(&unlink_value(d.total_components()))?,
        Some(&p) => {
            let vs = generic_rec(&switch_crossing(d, p)?, memo)?;
            let v0 = generic_rec(&smooth_crossing(d, p)?, memo)?;
            resolve(d.crossings[p].sign, &vs, &v0)?
        }
    };
    memo.insert(key, val.clone());
    Ok(val)
}

fn check_size(d: &LinkDiagram) -> Result<(), KnotError> {
    if d.crossings.len() > MAX_CROSSINGS {
        Err(KnotError::TooManyCrossings(d.crossings.len()))
    } else {
        Ok(())
    }
}

/// The generic invariant as a canonical rational function in x, y, z.
pub fn skein_generic(d: &LinkDiagram) -> Result<Expr, KnotError> {
    check_size(d)?;
    generic_rec(d, &mut HashMap::new())
}

/// Every value reachable by resolving at any admissible pivot at every step.
/// Well-definedness of the invariant means the result has length one.
pub fn skein_generic_all_pivots(d: &LinkDiagram) -> Result<Vec<Expr>, KnotError> {
    check_size(d)?;
    fn rec(
        d: &LinkDiagram,
        memo: &mut HashMap<String, BTreeMap<String, Expr>>,
    ) -> Result<BTreeMap<String, Expr>, KnotError> {
        let key = diagram_key(d);
        if let Some(v) = memo.get(&key) {
            return Ok(v.clone());
        }
        let bads = d.bad_crossings();
        let mut out = BTreeMap::new();
        if bads.is_empty() {
            let v = canonicalize(&unlink_value(d.total_components()))?;
            out.insert(v.to_string(), v);
        } else {
            for &p in &bads {
                let switched = rec(&switch_crossing(d, p)?, memo)?;
                let zero = rec(&smooth_crossing(d, p)?, memo)?;
                for vs in switched.values() {
                    for v0 in zero.values() {
                        let v = resolve(d.crossings[p].sign, vs, v0)?;
                        out.insert(v.to_string(), v);
                    }
                }
            }
        }
        memo.insert(key, out.clone());
        Ok(out)
    }
    Ok(rec(d, &mut HashMap::new())?.into_values().collect())
}

fn subst_map(pairs: &[(&str, Expr)]) -> HashMap<String, Expr> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

/// Evaluate the invariant `spec` names.
pub fn skein_evaluate(d: &LinkDiagram, spec: SkeinSpec) -> Result<SkeinValue, KnotError> {
    let p = skein_generic(d)?;
    Ok(match spec {
        SkeinSpec::Generic => SkeinValue::Generic(p),
        SkeinSpec::Conway => {
            // x = 1, y = -1: P+ - P- = z P0
            let m = subst_map(&[("x", Expr::one()), ("y", Expr::int(-1))]);
            let e = canonicalize(&substitute(&p, &m))?;
            SkeinValue::Conway(laurent1_from_expr(&e, "z")?)
        }
        SkeinSpec::Jones => SkeinValue::Jones(jones_laurent_of_generic(&p)?),
        SkeinSpec::Homfly => {
            // x = a, y = -1/a: a P+ - a^-1 P- = z P0
            let m = subst_map(&[
                ("x", Expr::var("a")),
                ("y", Expr::neg(Expr::pow(Expr::var("a"), -1))),
            ]);
            let e = canonicalize(&substitute(&p, &m))?;
            SkeinValue::Homfly(laurent2_from_expr(&e, "a", "z")?)
        }
    })
}

fn jones_laurent_of_generic(p: &Expr) -> Result<Laurent1, KnotError> {
    // x = s^-2, y = -s^2, z = s - s^-1: t^-1 V+ - t V- = (t^1/2 - t^-1/2) V0
    let m = subst_map(&[
        ("x", Expr::pow(Expr::var("s"), -2)),
        ("y", Expr::neg(Expr::pow(Expr::var("s"), 2))),
        (
            "z",
            Expr::sub(Expr::var("s"), Expr::pow(Expr::var("s"), -1)),
        ),
    ]);
    let e = canonicalize(&substitute(p, &m))?;
    laurent1_from_expr(&e, "s")
}

/// Jones value in the half-power variable s.
pub fn jones_laurent(d: &LinkDiagram) -> Result<Laurent1, KnotError> {
    jones_laurent_of_generic(&skein_generic(d)?)
}

/// Jones value at the Chern-Simons level k: s = exp(i pi / (k + 2)).
pub fn jones_at_level(d: &LinkDiagram, k: u32) -> Result<Complex64, KnotError> {
    if k == 0 {
        return Err(KnotError::BadLevel);
    }
    let v = jones_laurent(d)?;
    Ok(v.eval(level_root(k)))
}

fn level_root(k: u32) -> Complex64 {
    Complex64::from_polar(1.0, PI / (k as f64 + 2.0))
}

/// Numeric residuals of the level-k skein relation at crossing `c`, for the
/// two sign conventions of the smoothed term: the first subtracts z*V0 and is
/// an identity, the second adds it and is reported for comparison only.
pub fn witten_residuals(d: &LinkDiagram, c: usize, k: u32) -> Result<(f64, f64), KnotError> {
    if k == 0 {
        return Err(KnotError::BadLevel);
    }
    let triple = skein_triple(d, c)?;
    let vp = jones_laurent(&triple.plus)?;
    let vm = jones_laurent(&triple.minus)?;
    let v0 = jones_laurent(&triple.zero)?;
    let s = level_root(k);
    let t = s * s;
    let lhs = vp.eval(s) / t - vm.eval(s) * t;
    let z = s - 1.0 / s;
    let rhs = z * v0.eval(s);
    Ok(((lhs - rhs).norm(), (lhs + rhs).norm()))
}

// Laurent extraction from canonical expressions. The canonicalizer returns a
// polynomial, or a quotient with a monic denominator; the value is Laurent
// exactly when the denominator is a single monomial and every coefficient is
// real.

type Monomial = (GaussQ, BTreeMap<String, i64>);

fn as_monomial(e: &Expr) -> Option<Monomial> {
    match e {
        Expr::Const(c) => Some((c.clone(), BTreeMap::new())),
        Expr::Var(v) => Some((GaussQ::one(), BTreeMap::from([(v.clone(), 1)]))),
        Expr::Pow(b, k) => match &**b {
            Expr::Var(v) => Some((GaussQ::one(), BTreeMap::from([(v.clone(), *k)]))),
            _ => None,
        },
        Expr::Prod(fs) => {
            let mut coeff = GaussQ::one();
            let mut exps = BTreeMap::new();
            for f in fs {
                let (c, es) = as_monomial(f)?;
                coeff = &coeff * &c;
                for (v, e) in es {
                    *exps.entry(v).or_insert(0) += e;
                }
            }
            Some((coeff, exps))
        }
        _ => None,
    }
}

fn as_terms(e: &Expr) -> Option<Vec<Monomial>> {
    match e {
        Expr::Sum(ts) => ts.iter().map(as_monomial).collect(),
        other => as_monomial(other).map(|m| vec![m]),
    }
}

fn split_laurent(e: &Expr) -> Result<(Vec<Monomial>, Monomial), KnotError> {
    let bail = || KnotError::NotLaurent(e.to_string());
    match e {
        Expr::Quot(num, den) => {
            let n = as_terms(num).ok_or_else(bail)?;
            let d = as_monomial(den).ok_or_else(bail)?;
            Ok((n, d))
        }
        other => {
            let n = as_terms(other).ok_or_else(bail)?;
            Ok((n, (GaussQ::one(), BTreeMap::new())))
        }
    }
}

fn real_coeff(c: &GaussQ, whole: &Expr) -> Result<BigRational, KnotError> {
    if c.is_real() {
        Ok(c.re.clone())
    } else {
        Err(KnotError::NotLaurent(whole.to_string()))
    }
}

fn laurent1_from_expr(e: &Expr, var: &str) -> Result<Laurent1, KnotError> {
    let (terms, (dc, dexp)) = split_laurent(e)?;
    if dexp.keys().any(|v| v != var) {
        return Err(KnotError::NotLaurent(e.to_string()));
    }
    let shift = dexp.get(var).copied().unwrap_or(0);
    let dinv = dc.inv().expect("denominator is nonzero");
    let mut out = Laurent1::zero(var);
    for (c, exps) in terms {
        if exps.keys().any(|v| v != var) {
            return Err(KnotError::NotLaurent(e.to_string()));
        }
        let coeff = real_coeff(&(&c * &dinv), e)?;
        out.insert_add(exps.get(var).copied().unwrap_or(0) - shift, &coeff);
    }
    Ok(out)
}

fn laurent2_from_expr(e: &Expr, v0: &str, v1: &str) -> Result<Laurent2, KnotError> {
    let (terms, (dc, dexp)) = split_laurent(e)?;
    if dexp.keys().any(|v| v != v0 && v != v1) {
        return Err(KnotError::NotLaurent(e.to_string()));
    }
    let s0 = dexp.get(v0).copied().unwrap_or(0);
    let s1 = dexp.get(v1).copied().unwrap_or(0);
    let dinv = dc.inv().expect("denominator is nonzero");
    let mut out = Laurent2::zero(v0, v1);
    for (c, exps) in terms {
        if exps.keys().any(|v| v != v0 && v != v1) {
            return Err(KnotError::NotLaurent(e.to_string()));
        }
        let coeff = real_coeff(&(&c * &dinv), e)?;
        let e0 = exps.get(v0).copied().unwrap_or(0) - s0;
        let e1 = exps.get(v1).copied().unwrap_or(0) - s1;
        out.insert_add((e0, e1), &coeff);
    }
    Ok(out)
}
