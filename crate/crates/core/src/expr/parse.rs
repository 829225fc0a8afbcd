//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | factor
//! factor := base ("^" int)?
//! base   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```
//!
//! `^` takes a literal integer exponent (optionally negative) and binds
//! tighter than unary minus. There is no implied multiplication. Decimal
//! literals become exact rationals. `i` is the imaginary unit; `hbar` and
//! `pi` are reserved symbols.

use super::{Expr, UnaryFn};
use crate::scalar::GaussQ;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input where the problem starts.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token plus its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, start));
        }
        let c = self.src[self.pos];
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let mut frac_digits = 0usize;
            if self.pos < self.src.len() && self.src[self.pos] == b'.' {
                self.pos += 1;
                let frac_start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                frac_digits = self.pos - frac_start;
                if frac_digits == 0 {
                    return Err(ParseError {
                        offset: self.pos,
                        message: "expected digits after decimal point".into(),
                    });
                }
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let digits: String = text.chars().filter(|&ch| ch != '.').collect();
            let numer: BigInt = digits.parse().unwrap();
            let denom = BigInt::from(10u32).pow(frac_digits as u32);
            return Ok((Tok::Num(BigRational::new(numer, denom)), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((Tok::Ident(text.to_string()), start));
        }
        Err(ParseError {
            offset: start,
            message: format!("unexpected character '{}'", c as char),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, tok_at) = lexer.next()?;
        Ok(Parser { lexer, tok, tok_at })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.tok_at = at;
        Ok(())
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.tok_at,
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump()?;
                    terms.push(Expr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    acc = Expr::mul2(acc, self.unary()?);
                }
                Tok::Slash => {
                    self.bump()?;
                    acc = Expr::div(acc, self.unary()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.bump()?;
            return Ok(Expr::neg(self.unary()?));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.tok == Tok::Caret {
            self.bump()?;
            let negative = if self.tok == Tok::Minus {
                self.bump()?;
                true
            } else {
                false
            };
            let k = match &self.tok {
                Tok::Num(r) => {
                    if !num_traits::One::is_one(r.denom()) {
                        return self.err("exponent must be an integer");
                    }
                    let v: i64 = r
                        .numer()
                        .try_into()
                        .map_err(|_| ParseError {
                            offset: self.tok_at,
                            message: "exponent out of range".into(),
                        })?;
                    v
                }
                _ => return self.err("expected integer exponent after '^'"),
            };
            self.bump()?;
            let k = if negative { -k } else { k };
            return Ok(Expr::pow(base, k));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(r) => {
                self.bump()?;
                Ok(Expr::Const(GaussQ::from_rational(r)))
            }
            Tok::Ident(name) => {
                let at = self.tok_at;
                self.bump()?;
                if self.tok == Tok::LParen {
                    let Some(f) = UnaryFn::from_name(&name) else {
                        return Err(ParseError {
                            offset: at,
                            message: format!("unknown function '{name}'"),
                        });
                    };
                    self.bump()?;
                    let arg = self.expr()?;
                    if self.tok != Tok::RParen {
                        return self.err("expected ')'");
                    }
                    self.bump()?;
                    return Ok(Expr::func(f, arg));
                }
                if name == "i" {
                    Ok(Expr::imag())
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return self.err("expected ')'");
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::End => self.err("unexpected end of input"),
            _ => self.err("expected a number, name, or '('"),
        }
    }
}

/// Parse an expression; errors carry the byte offset of the offending token.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("q + p*2").unwrap().to_string(), "q + 2*p");
        // ^ binds tighter than unary minus
        assert_eq!(
            parse("-q^2").unwrap(),
            Expr::neg(Expr::pow(Expr::var("q"), 2))
        );
        assert_eq!(parse("q^-2").unwrap(), Expr::pow(Expr::var("q"), -2));
    }

    #[test]
    fn chained_caret_rejected() {
        // factor := base ("^" int)?: the exponent is a literal, so a second
        // caret is trailing input, not a nested power.
        assert!(parse("q^2^3").is_err());
    }

    #[test]
    fn decimals_and_reserved() {
        assert_eq!(parse("0.25").unwrap(), Expr::ratio(1, 4));
        assert_eq!(parse("i*i").unwrap(), Expr::int(-1));
        assert_eq!(parse("hbar").unwrap(), Expr::var("hbar"));
        assert_eq!(parse("pi").unwrap(), Expr::var("pi"));
    }

    #[test]
    fn functions() {
        let e = parse("sin(q)^2 + cos(q)^2").unwrap();
        assert_eq!(e.to_string(), "sin(q)^2 + cos(q)^2");
        let err = parse("foo(q)").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(err.message.contains("unknown function"));
    }

    #[test]
    fn error_offsets() {
        let err = parse("q + ").unwrap_err();
        assert_eq!(err.offset, 4);
        let err = parse("q @ p").unwrap_err();
        assert_eq!(err.offset, 2);
        let err = parse("(q").unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn no_implied_multiplication() {
        assert!(parse("2q").is_err());
        assert!(parse("q p").is_err());
    }
}
