//! Differentiation, substitution, and numeric evaluation.

use super::{Expr, UnaryFn};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt;

/// Exact partial derivative with respect to `var`.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    match e {
        Expr::Var(v) => {
            if v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Const(_) => Expr::zero(),
        Expr::Sum(ts) => Expr::add(ts.iter().map(|t| differentiate(t, var)).collect()),
        Expr::Prod(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for (k, f) in fs.iter().enumerate() {
                let df = differentiate(f, var);
                if df.is_zero_const() {
                    continue;
                }
                let mut factors: Vec<Expr> = Vec::with_capacity(fs.len());
                for (j, g) in fs.iter().enumerate() {
                    factors.push(if j == k { df.clone() } else { g.clone() });
                }
                terms.push(Expr::mul(factors));
            }
            Expr::add(terms)
        }
        Expr::Pow(b, k) => {
            let db = differentiate(b, var);
            if db.is_zero_const() {
                return Expr::zero();
            }
            Expr::mul(vec![
                Expr::int(*k),
                Expr::pow((**b).clone(), k - 1),
                db,
            ])
        }
        Expr::Quot(a, b) => {
            let da = differentiate(a, var);
            let db = differentiate(b, var);
            // (a'b - ab') / b^2
            let num = Expr::sub(
                Expr::mul2(da, (**b).clone()),
                Expr::mul2((**a).clone(), db),
            );
            Expr::div(num, Expr::pow((**b).clone(), 2))
        }
        Expr::Func(f, a) => {
            let da = differentiate(a, var);
            if da.is_zero_const() {
                return Expr::zero();
            }
            let arg = (**a).clone();
            let outer = match f {
                UnaryFn::Sin => Expr::func(UnaryFn::Cos, arg),
                UnaryFn::Cos => Expr::neg(Expr::func(UnaryFn::Sin, arg)),
                UnaryFn::Exp => Expr::func(UnaryFn::Exp, arg),
                UnaryFn::Log => return Expr::div(da, arg),
                UnaryFn::Sqrt => {
                    return Expr::div(da, Expr::mul2(Expr::int(2), Expr::func(UnaryFn::Sqrt, arg)))
                }
            };
            Expr::mul2(outer, da)
        }
    }
}

/// Simultaneous substitution of expressions for variables.
pub fn substitute(e: &Expr, bindings: &HashMap<String, Expr>) -> Expr {
    match e {
        Expr::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| e.clone()),
        Expr::Const(_) => e.clone(),
        Expr::Sum(ts) => Expr::add(ts.iter().map(|t| substitute(t, bindings)).collect()),
        Expr::Prod(fs) => Expr::mul(fs.iter().map(|t| substitute(t, bindings)).collect()),
        Expr::Pow(b, k) => Expr::pow(substitute(b, bindings), *k),
        Expr::Quot(a, b) => Expr::div(substitute(a, bindings), substitute(b, bindings)),
        Expr::Func(f, a) => Expr::func(*f, substitute(a, bindings)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    UnboundVariable(String),
    DivisionByZero,
    /// 0 raised to a negative power.
    ZeroToNegativePower,
    NonFinite,
    /// A constant with nonzero imaginary part fed to a real-only evaluator.
    NonRealConstant,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::UnboundVariable(v) => write!(f, "unbound variable '{v}'"),
            EvalError::DivisionByZero => write!(f, "division by zero"),
            EvalError::ZeroToNegativePower => write!(f, "zero raised to a negative power"),
            EvalError::NonFinite => write!(f, "evaluation produced a non-finite value"),
            EvalError::NonRealConstant => {
                write!(f, "complex constant in a real-only evaluation")
            }
        }
    }
}

impl std::error::Error for EvalError {}

const POLE_EPS: f64 = 1e-300;

/// Evaluate over Complex64. `pi` is bound to its numeric value unless the
/// caller overrides it; every other variable must appear in `bindings`.
pub fn eval_numeric(
    e: &Expr,
    bindings: &HashMap<String, Complex64>,
) -> Result<Complex64, EvalError> {
    let v = eval_inner(e, bindings)?;
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(EvalError::NonFinite);
    }
    Ok(v)
}

fn eval_inner(
    e: &Expr,
    bindings: &HashMap<String, Complex64>,
) -> Result<Complex64, EvalError> {
    match e {
        Expr::Var(v) => {
            if let Some(x) = bindings.get(v) {
                Ok(*x)
            } else if v == "pi" {
                Ok(Complex64::new(std::f64::consts::PI, 0.0))
            } else {
                Err(EvalError::UnboundVariable(v.clone()))
            }
        }
        Expr::Const(c) => {
            let (re, im) = c.to_f64_pair();
            Ok(Complex64::new(re, im))
        }
        Expr::Sum(ts) => {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in ts {
                acc += eval_inner(t, bindings)?;
            }
            Ok(acc)
        }
        Expr::Prod(fs) => {
            let mut acc = Complex64::new(1.0, 0.0);
            for t in fs {
                acc *= eval_inner(t, bindings)?;
            }
            Ok(acc)
        }
        Expr::Pow(b, k) => {
            let base = eval_inner(b, bindings)?;
            if *k < 0 && base.norm() < POLE_EPS {
                return Err(EvalError::ZeroToNegativePower);
            }
            Ok(base.powi(*k as i32))
        }
        Expr::Quot(a, b) => {
            let num = eval_inner(a, bindings)?;
            let den = eval_inner(b, bindings)?;
            if den.norm() < POLE_EPS {
                return Err(EvalError::DivisionByZero);
            }
            Ok(num / den)
        }
        Expr::Func(f, a) => {
            let x = eval_inner(a, bindings)?;
            Ok(match f {
                UnaryFn::Sin => x.sin(),
                UnaryFn::Cos => x.cos(),
                UnaryFn::Exp => x.exp(),
                UnaryFn::Log => x.ln(),
                UnaryFn::Sqrt => x.sqrt(),
            })
        }
    }
}

/// Evaluate an expression expected to be real; the imaginary part must be
/// negligible relative to the magnitude.
pub fn eval_real(e: &Expr, bindings: &HashMap<String, f64>) -> Result<f64, EvalError> {
    let complex_bindings: HashMap<String, Complex64> = bindings
        .iter()
        .map(|(k, v)| (k.clone(), Complex64::new(*v, 0.0)))
        .collect();
    let v = eval_numeric(e, &complex_bindings)?;
    if v.im.abs() > 1e-9 * (1.0 + v.re.abs()) {
        return Err(EvalError::NonFinite);
    }
    Ok(v.re)
}

/// Expression precompiled against a fixed variable layout, for the inner
/// loops of numeric integrators where a fresh `HashMap` per evaluation and
/// bignum-to-float conversion would dominate the step cost.
#[derive(Clone, Debug, PartialEq)]
pub enum CompiledExpr {
    Const(f64),
    /// Index into the value slice passed to `eval`.
    Slot(usize),
    Sum(Vec<CompiledExpr>),
    Prod(Vec<CompiledExpr>),
    Pow(Box<CompiledExpr>, i32),
    Quot(Box<CompiledExpr>, Box<CompiledExpr>),
    Func(UnaryFn, Box<CompiledExpr>),
}

/// Resolve every variable to its position in `vars`. `pi` folds to its
/// numeric value unless listed; unknown names and complex constants are
/// rejected here rather than at evaluation time.
pub fn compile_real(e: &Expr, vars: &[String]) -> Result<CompiledExpr, EvalError> {
    match e {
        Expr::Var(v) => {
            if let Some(i) = vars.iter().position(|n| n == v) {
                Ok(CompiledExpr::Slot(i))
            } else if v == "pi" {
                Ok(CompiledExpr::Const(std::f64::consts::PI))
            } else {
                Err(EvalError::UnboundVariable(v.clone()))
            }
        }
        Expr::Const(c) => {
            let (re, im) = c.to_f64_pair();
            if im != 0.0 {
                return Err(EvalError::NonRealConstant);
            }
            Ok(CompiledExpr::Const(re))
        }
        Expr::Sum(ts) => Ok(CompiledExpr::Sum(
            ts.iter()
                .map(|t| compile_real(t, vars))
                .collect::<Result<_, _>>()?,
        )),
        Expr::Prod(fs) => Ok(CompiledExpr::Prod(
            fs.iter()
                .map(|t| compile_real(t, vars))
                .collect::<Result<_, _>>()?,
        )),
        Expr::Pow(b, k) => Ok(CompiledExpr::Pow(
            Box::new(compile_real(b, vars)?),
            *k as i32,
        )),
        Expr::Quot(a, b) => Ok(CompiledExpr::Quot(
            Box::new(compile_real(a, vars)?),
            Box::new(compile_real(b, vars)?),
        )),
        Expr::Func(f, a) => Ok(CompiledExpr::Func(*f, Box::new(compile_real(a, vars)?))),
    }
}

impl CompiledExpr {
    /// `vals` supplies one value per slot, in the order given to
    /// `compile_real`.
    pub fn eval(&self, vals: &[f64]) -> Result<f64, EvalError> {
        let v = self.eval_inner(vals)?;
        if !v.is_finite() {
            return Err(EvalError::NonFinite);
        }
        Ok(v)
    }

    fn eval_inner(&self, vals: &[f64]) -> Result<f64, EvalError> {
        match self {
            CompiledExpr::Const(c) => Ok(*c),
            CompiledExpr::Slot(i) => Ok(vals[*i]),
            CompiledExpr::Sum(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval_inner(vals)?;
                }
                Ok(acc)
            }
            CompiledExpr::Prod(fs) => {
                let mut acc = 1.0;
                for t in fs {
                    acc *= t.eval_inner(vals)?;
                }
                Ok(acc)
            }
            CompiledExpr::Pow(b, k) => {
                let base = b.eval_inner(vals)?;
                if *k < 0 && base.abs() < POLE_EPS {
                    return Err(EvalError::ZeroToNegativePower);
                }
                Ok(base.powi(*k))
            }
            CompiledExpr::Quot(a, b) => {
                let num = a.eval_inner(vals)?;
                let den = b.eval_inner(vals)?;
                if den.abs() < POLE_EPS {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(num / den)
            }
            CompiledExpr::Func(f, a) => {
                let x = a.eval_inner(vals)?;
                Ok(match f {
                    UnaryFn::Sin => x.sin(),
                    UnaryFn::Cos => x.cos(),
                    UnaryFn::Exp => x.exp(),
                    UnaryFn::Log => x.ln(),
                    UnaryFn::Sqrt => x.sqrt(),
                })
            }
        }
    }
}

/// Complex-valued counterpart of [`CompiledExpr`], for integrands whose
/// coefficients carry i (connection matrices in a unitary basis).
#[derive(Clone, Debug, PartialEq)]
pub enum CompiledComplex {
    Const(Complex64),
    Slot(usize),
    Sum(Vec<CompiledComplex>),
    Prod(Vec<CompiledComplex>),
    Pow(Box<CompiledComplex>, i32),
    Quot(Box<CompiledComplex>, Box<CompiledComplex>),
    Func(UnaryFn, Box<CompiledComplex>),
}

/// Resolve variables to positions in `vars`; `pi` folds unless listed.
pub fn compile_complex(e: &Expr, vars: &[String]) -> Result<CompiledComplex, EvalError> {
    match e {
        Expr::Var(v) => {
            if let Some(i) = vars.iter().position(|n| n == v) {
                Ok(CompiledComplex::Slot(i))
            } else if v == "pi" {
                Ok(CompiledComplex::Const(Complex64::new(
                    std::f64::consts::PI,
                    0.0,
                )))
            } else {
                Err(EvalError::UnboundVariable(v.clone()))
            }
        }
        Expr::Const(c) => {
            let (re, im) = c.to_f64_pair();
            Ok(CompiledComplex::Const(Complex64::new(re, im)))
        }
        Expr::Sum(ts) => Ok(CompiledComplex::Sum(
            ts.iter()
                .map(|t| compile_complex(t, vars))
                .collect::<Result<_, _>>()?,
        )),
        Expr::Prod(fs) => Ok(CompiledComplex::Prod(
            fs.iter()
                .map(|t| compile_complex(t, vars))
                .collect::<Result<_, _>>()?,
        )),
        Expr::Pow(b, k) => Ok(CompiledComplex::Pow(
            Box::new(compile_complex(b, vars)?),
            *k as i32,
        )),
        Expr::Quot(a, b) => Ok(CompiledComplex::Quot(
            Box::new(compile_complex(a, vars)?),
            Box::new(compile_complex(b, vars)?),
        )),
        Expr::Func(f, a) => Ok(CompiledComplex::Func(
            *f,
            Box::new(compile_complex(a, vars)?),
        )),
    }
}

impl CompiledComplex {
    pub fn eval(&self, vals: &[Complex64]) -> Result<Complex64, EvalError> {
        let v = self.eval_inner(vals)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(EvalError::NonFinite);
        }
        Ok(v)
    }

    fn eval_inner(&self, vals: &[Complex64]) -> Result<Complex64, EvalError> {
        match self {
            CompiledComplex::Const(c) => Ok(*c),
            CompiledComplex::Slot(i) => Ok(vals[*i]),
            CompiledComplex::Sum(ts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in ts {
                    acc += t.eval_inner(vals)?;
                }
                Ok(acc)
            }
            CompiledComplex::Prod(fs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for t in fs {
                    acc *= t.eval_inner(vals)?;
                }
                Ok(acc)
            }
            CompiledComplex::Pow(b, k) => {
                let base = b.eval_inner(vals)?;
                if *k < 0 && base.norm() < POLE_EPS {
                    return Err(EvalError::ZeroToNegativePower);
                }
                Ok(base.powi(*k))
            }
            CompiledComplex::Quot(a, b) => {
                let num = a.eval_inner(vals)?;
                let den = b.eval_inner(vals)?;
                if den.norm() < POLE_EPS {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(num / den)
            }
            CompiledComplex::Func(f, a) => {
                let x = a.eval_inner(vals)?;
                Ok(match f {
                    UnaryFn::Sin => x.sin(),
                    UnaryFn::Cos => x.cos(),
                    UnaryFn::Exp => x.exp(),
                    UnaryFn::Log => x.ln(),
                    UnaryFn::Sqrt => x.sqrt(),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;

    fn d(src: &str, var: &str) -> String {
        differentiate(&parse(src).unwrap(), var).to_string()
    }

    #[test]
    fn derivative_rules() {
        assert_eq!(d("q^2", "q"), "2*q");
        assert_eq!(d("q*p", "q"), "p");
        assert_eq!(d("sin(q)", "q"), "cos(q)");
        assert_eq!(d("cos(q)", "q"), "-sin(q)");
        assert_eq!(d("q^2 + p^2", "p"), "2*p");
        assert_eq!(d("1/q", "q"), Expr::div(Expr::int(-1), Expr::pow(Expr::var("q"), 2)).to_string());
    }

    #[test]
    fn chain_rule() {
        let e = parse("exp(q^2)").unwrap();
        let de = differentiate(&e, "q");
        // exp(q^2) * 2q
        let mut b = HashMap::new();
        b.insert("q".to_string(), Complex64::new(0.7, 0.0));
        let got = eval_numeric(&de, &b).unwrap();
        let want = (0.7f64 * 0.7).exp() * 1.4;
        assert!((got.re - want).abs() < 1e-12);
    }

    #[test]
    fn substitution() {
        let e = parse("x^2 + y").unwrap();
        let mut b = HashMap::new();
        b.insert("x".to_string(), parse("u + v").unwrap());
        let s = substitute(&e, &b);
        assert_eq!(s.to_string(), "(u + v)^2 + y");
    }

    #[test]
    fn eval_pi_default() {
        let e = parse("sin(pi/2)").unwrap();
        let got = eval_numeric(&e, &HashMap::new()).unwrap();
        assert!((got.re - 1.0).abs() < 1e-15);
        // caller may override pi
        let mut b = HashMap::new();
        b.insert("pi".to_string(), Complex64::new(0.0, 0.0));
        let got = eval_numeric(&e, &b).unwrap();
        assert!(got.re.abs() < 1e-15);
    }

    #[test]
    fn eval_errors() {
        let e = parse("1/x").unwrap();
        let mut b = HashMap::new();
        b.insert("x".to_string(), Complex64::new(0.0, 0.0));
        assert_eq!(eval_numeric(&e, &b), Err(EvalError::DivisionByZero));
        let e = parse("x^-1").unwrap();
        assert_eq!(eval_numeric(&e, &b), Err(EvalError::ZeroToNegativePower));
        let e = parse("y").unwrap();
        assert!(matches!(
            eval_numeric(&e, &b),
            Err(EvalError::UnboundVariable(_))
        ));
    }

    #[test]
    fn compiled_matches_tree_walker() {
        let vars = vec!["q".to_string(), "p".to_string()];
        let e = parse("sin(q)*p^2 - exp(p)/(q + 3) + pi").unwrap();
        let c = compile_real(&e, &vars).unwrap();
        for (q, p) in [(0.3, -1.2), (2.0, 0.5), (-0.7, 0.0)] {
            let mut b = HashMap::new();
            b.insert("q".to_string(), q);
            b.insert("p".to_string(), p);
            let slow = eval_real(&e, &b).unwrap();
            let fast = c.eval(&[q, p]).unwrap();
            assert!((slow - fast).abs() <= 1e-12 * (1.0 + slow.abs()));
        }
    }

    #[test]
    fn compiled_rejects_bad_input() {
        let vars = vec!["q".to_string()];
        assert_eq!(
            compile_real(&parse("q + z").unwrap(), &vars),
            Err(EvalError::UnboundVariable("z".to_string()))
        );
        assert_eq!(
            compile_real(&parse("i*q").unwrap(), &vars),
            Err(EvalError::NonRealConstant)
        );
        let c = compile_real(&parse("1/q").unwrap(), &vars).unwrap();
        assert_eq!(c.eval(&[0.0]), Err(EvalError::DivisionByZero));
    }
}
