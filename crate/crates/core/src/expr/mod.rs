//! Symbolic expressions over the Gaussian rationals.
//!
//! The AST is deliberately small: sums, products, integer powers, quotients,
//! and a fixed set of unary functions. Everything a chart coordinate, a
//! Hamiltonian, or a connection coefficient needs, and nothing that would
//! break the decidable zero test in [`poly`].

pub mod calculus;
pub mod parse;
pub mod poly;

use crate::scalar::GaussQ;
use std::collections::BTreeSet;
use std::fmt;

/// Unary functions admitted in expressions.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum UnaryFn {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Log => "log",
            UnaryFn::Sqrt => "sqrt",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => UnaryFn::Sin,
            "cos" => UnaryFn::Cos,
            "exp" => UnaryFn::Exp,
            "log" => UnaryFn::Log,
            "sqrt" => UnaryFn::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum Expr {
    Var(String),
    Const(GaussQ),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    /// Integer power; the exponent may be negative.
    Pow(Box<Expr>, i64),
    Quot(Box<Expr>, Box<Expr>),
    Func(UnaryFn, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(GaussQ::from_int(n))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::Const(GaussQ::from_ratio(p, q))
    }

    pub fn imag() -> Expr {
        Expr::Const(GaussQ::i())
    }

    pub fn hbar() -> Expr {
        Expr::var("hbar")
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn is_zero_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    /// Sum with flattening and constant folding. Keeps trees shallow so the
    /// printer and the canonicalizer see small inputs.
    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::new();
        let mut konst = GaussQ::zero();
        for t in terms {
            match t {
                Expr::Sum(inner) => {
                    for u in inner {
                        match u {
                            Expr::Const(c) => konst = &konst + &c,
                            other => flat.push(other),
                        }
                    }
                }
                Expr::Const(c) => konst = &konst + &c,
                other => flat.push(other),
            }
        }
        if !konst.is_zero() {
            flat.push(Expr::Const(konst));
        }
        match flat.len() {
            0 => Expr::zero(),
            1 => flat.pop().unwrap(),
            _ => Expr::Sum(flat),
        }
    }

    pub fn add2(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, b])
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add2(a, Expr::neg(b))
    }

    /// Product with flattening, constant folding, and zero absorption.
    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut flat = Vec::new();
        let mut konst = GaussQ::one();
        for t in factors {
            match t {
                Expr::Prod(inner) => {
                    for u in inner {
                        match u {
                            Expr::Const(c) => konst = &konst * &c,
                            other => flat.push(other),
                        }
                    }
                }
                Expr::Const(c) => konst = &konst * &c,
                other => flat.push(other),
            }
        }
        if konst.is_zero() {
            return Expr::zero();
        }
        if flat.is_empty() {
            return Expr::Const(konst);
        }
        if !konst.is_one() {
            flat.insert(0, Expr::Const(konst));
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Expr::Prod(flat)
        }
    }

    pub fn mul2(a: Expr, b: Expr) -> Expr {
        Expr::mul(vec![a, b])
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::mul2(Expr::int(-1), a)
    }

    pub fn pow(base: Expr, k: i64) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return base;
        }
        match base {
            Expr::Const(c) => {
                if let Some(v) = c.pow(k) {
                    return Expr::Const(v);
                }
                // 0^negative: keep the node; evaluation reports the pole.
                Expr::Pow(Box::new(Expr::Const(c)), k)
            }
            Expr::Pow(inner, m) => Expr::pow(*inner, m.checked_mul(k).expect("exponent overflow")),
            other => Expr::Pow(Box::new(other), k),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if b.is_one_const() {
            return a;
        }
        if a.is_zero_const() && !b.is_zero_const() {
            return Expr::zero();
        }
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if !y.is_zero() {
                return Expr::Const(x / y);
            }
        }
        Expr::Quot(Box::new(a), Box::new(b))
    }

    pub fn func(f: UnaryFn, arg: Expr) -> Expr {
        Expr::Func(f, Box::new(arg))
    }

    /// Free variable names, sorted.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Const(_) => {}
            Expr::Sum(ts) | Expr::Prod(ts) => {
                for t in ts {
                    t.collect_vars(out);
                }
            }
            Expr::Pow(b, _) => b.collect_vars(out),
            Expr::Quot(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Func(_, a) => a.collect_vars(out),
        }
    }

    pub fn contains_func(&self) -> bool {
        match self {
            Expr::Func(_, _) => true,
            Expr::Var(_) | Expr::Const(_) => false,
            Expr::Sum(ts) | Expr::Prod(ts) => ts.iter().any(|t| t.contains_func()),
            Expr::Pow(b, _) => b.contains_func(),
            Expr::Quot(a, b) => a.contains_func() || b.contains_func(),
        }
    }
}

// Printing. Precedence: Sum < Quot < Prod < Pow < atom.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Sum(_) => 1,
        Expr::Quot(_, _) => 2,
        Expr::Prod(_) => 3,
        Expr::Pow(_, _) => 4,
        Expr::Const(c) => const_prec(c),
        _ => 5,
    }
}

fn const_prec(c: &GaussQ) -> u8 {
    use num_traits::{One, Signed, Zero};
    if c.is_real() {
        if c.re.is_negative() {
            1
        } else {
            5
        }
    } else if c.re.is_zero() {
        if c.im.is_negative() {
            1
        } else if c.im.is_one() {
            5
        } else {
            3 // prints "2*i"
        }
    } else {
        1 // prints "a+b*i"
    }
}

fn write_paren(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if prec(e) < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// If a sum term carries a leading negative real factor, return it negated so
/// the sum can print "a - b" instead of "a + -b".
fn as_negated(e: &Expr) -> Option<Expr> {
    use num_traits::Signed;
    match e {
        Expr::Const(c) => {
            if c.is_real() && c.re.is_negative() {
                Some(Expr::Const(-c))
            } else {
                None
            }
        }
        Expr::Prod(fs) => {
            if let Some(Expr::Const(c)) = fs.first() {
                if c.is_real() && c.re.is_negative() {
                    let mut rest = fs.clone();
                    rest[0] = Expr::Const(-c);
                    return Some(Expr::mul(rest));
                }
            }
            None
        }
        _ => None,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Sum(ts) => {
                for (k, t) in ts.iter().enumerate() {
                    if k == 0 {
                        write!(f, "{t}")?;
                    } else if let Some(pos) = as_negated(t) {
                        write!(f, " - ")?;
                        write_paren(f, &pos, 2)?;
                    } else {
                        write!(f, " + ")?;
                        write_paren(f, t, 2)?;
                    }
                }
                Ok(())
            }
            Expr::Prod(fs) => {
                // A leading -1 prints as a bare minus sign.
                let mut rest: &[Expr] = fs;
                if let Some(Expr::Const(c)) = fs.first() {
                    if c.is_real() && (-c).is_one() {
                        write!(f, "-")?;
                        rest = &fs[1..];
                        if rest.len() == 1 {
                            return write_paren(f, &rest[0], 3);
                        }
                    }
                }
                for (k, t) in rest.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    // prec 3 suffices: a "2*i" constant is itself a product
                    // and multiplication associates.
                    write_paren(f, t, 3)?;
                }
                Ok(())
            }
            Expr::Pow(b, k) => {
                write_paren(f, b, 5)?;
                write!(f, "^{k}")
            }
            Expr::Quot(a, b) => {
                write_paren(f, a, 3)?;
                write!(f, "/")?;
                write_paren(f, b, 4)
            }
            Expr::Func(fun, a) => write!(f, "{}({})", fun.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_fold() {
        let e = Expr::add(vec![Expr::int(2), Expr::int(3), Expr::var("q")]);
        assert_eq!(e.to_string(), "q + 5");
        let p = Expr::mul(vec![Expr::int(0), Expr::var("q")]);
        assert!(p.is_zero_const());
        assert_eq!(Expr::pow(Expr::var("q"), 0), Expr::one());
    }

    #[test]
    fn display_precedence() {
        let e = Expr::mul2(Expr::add2(Expr::var("x"), Expr::var("y")), Expr::var("z"));
        assert_eq!(e.to_string(), "(x + y)*z");
        let p = Expr::pow(Expr::add2(Expr::var("x"), Expr::int(1)), -2);
        assert_eq!(p.to_string(), "(x + 1)^-2");
        let m = Expr::mul(vec![
            Expr::int(2),
            Expr::imag(),
            Expr::var("hbar"),
            Expr::var("p"),
        ]);
        assert_eq!(m.to_string(), "2*i*hbar*p");
    }
}
