//! Arithmetic literals: the grammar shared by scalar literals, Grassmann
//! literals (`3 + 2*e1*e2`) and parametric values (`l*m^2`).
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' ['-'] integer)?
//! atom   := number | 'e'<k> | 'sqrt(' ['-'] integer ')' | 'i' | name | '(' expr ')'
//! ```
//!
//! Numbers are decimal with an optional exponent (`1.5e-30`, `2E3`); they are
//! read as exact rationals.  A lowercase `e` only starts an exponent when
//! followed by a sign, so `e1` is always a generator.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::grassmann::{Grassmann, GrassmannError};
use crate::scalars::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("{0} is not an element of the field")]
    NotInField(String),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigRational),
    Gen(usize),
    Sqrt(i64),
    Imag,
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Expr::Num(q) => write!(f, "({}/{})", q.numer(), q.denom()),
            Expr::Gen(k) => write!(f, "e{k}"),
            Expr::Sqrt(d) => write!(f, "sqrt({d})"),
            Expr::Imag => f.write_str("i"),
            Expr::Var(v) => f.write_str(v),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/{b}"),
            Expr::Pow(a, k) => write!(f, "{a}^{k}"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.pos + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{}`", c as char))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            let k = self.integer()?;
            return Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse().or_else(|_| self.err("integer out of range"))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let s = self.src;
        let start = self.pos;
        let mut digits = String::new();
        let mut frac = 0i64;
        while self.pos < s.len() && s[self.pos].is_ascii_digit() {
            digits.push(s[self.pos] as char);
            self.pos += 1;
        }
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                digits.push(s[self.pos] as char);
                frac += 1;
                self.pos += 1;
            }
        }
        if digits.is_empty() {
            self.pos = start;
            return self.err("malformed number");
        }
        let mut exp = 0i64;
        if self.pos < s.len() && (s[self.pos] == b'E' || s[self.pos] == b'e') {
            let sign_follows = matches!(s.get(self.pos + 1), Some(b'+') | Some(b'-'));
            if s[self.pos] == b'E' || sign_follows {
                self.pos += 1;
                let neg = s[self.pos] == b'-';
                if sign_follows {
                    self.pos += 1;
                }
                let k = self.integer()?;
                exp = if neg { -k } else { k };
            }
        }
        let mantissa: BigInt = digits.parse().expect("decimal digits");
        let shift = exp - frac;
        let ten = BigInt::from(10);
        let q = if shift >= 0 {
            BigRational::from_integer(mantissa * ten.pow(shift as u32))
        } else {
            BigRational::new(mantissa, ten.pow((-shift) as u32))
        };
        Ok(Expr::Num(q))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii name");
                if name == "sqrt" {
                    self.expect(b'(')?;
                    let neg = self.eat(b'-');
                    let d = self.integer()?;
                    self.expect(b')')?;
                    return Ok(Expr::Sqrt(if neg { -d } else { d }));
                }
                if name == "i" {
                    return Ok(Expr::Imag);
                }
                if let Some(k) = name.strip_prefix('e').filter(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit())) {
                    let k: usize = k.parse().or_else(|_| self.err("generator index out of range"))?;
                    if k == 0 {
                        self.pos = start;
                        return self.err("generators are numbered from e1");
                    }
                    return Ok(Expr::Gen(k));
                }
                Ok(Expr::Var(name.to_string()))
            }
            Some(c) => self.err(format!("unexpected `{}`", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let e = p.expr()?;
        if p.peek().is_some() {
            return p.err("trailing input");
        }
        Ok(e)
    }

    /// Names of the free variables.
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
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            _ => {}
        }
    }

    /// Highest generator index used.
    pub fn max_generator(&self) -> usize {
        match self {
            Expr::Gen(k) => *k,
            Expr::Neg(a) | Expr::Pow(a, _) => a.max_generator(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.max_generator().max(b.max_generator()),
            _ => 0,
        }
    }

    /// Evaluates in the Grassmann algebra of the given rank; variables are
    /// looked up in `env`.
    pub fn eval_grassmann<S: Scalar>(
        &self,
        rank: u8,
        ctx: &S::Ctx,
        env: &dyn Fn(&str) -> Option<S>,
    ) -> Result<Grassmann<S>, EvalError> {
        let rec = |e: &Expr| e.eval_grassmann(rank, ctx, env);
        Ok(match self {
            Expr::Num(q) => Grassmann::scalar(rank, S::from_rational(ctx, q)),
            Expr::Gen(k) => Grassmann::generator(rank, ctx, *k)?,
            Expr::Sqrt(d) => Grassmann::scalar(rank, S::sqrt_int(ctx, *d).ok_or_else(|| EvalError::NotInField(format!("sqrt({d})")))?),
            Expr::Imag => Grassmann::scalar(rank, S::imaginary_unit(ctx).ok_or_else(|| EvalError::NotInField("i".into()))?),
            Expr::Var(v) => Grassmann::scalar(rank, env(v).ok_or_else(|| EvalError::UnknownSymbol(v.clone()))?),
            Expr::Neg(a) => -rec(a)?,
            Expr::Add(a, b) => rec(a)? + rec(b)?,
            Expr::Sub(a, b) => rec(a)? - rec(b)?,
            Expr::Mul(a, b) => rec(a)? * rec(b)?,
            Expr::Div(a, b) => rec(a)?.div(&rec(b)?)?,
            Expr::Pow(a, k) => rec(a)?.powi(*k)?,
        })
    }

    /// Evaluates as a field element; generators are rejected.
    pub fn eval_scalar<S: Scalar>(&self, ctx: &S::Ctx, env: &dyn Fn(&str) -> Option<S>) -> Result<S, EvalError> {
        Ok(self.eval_grassmann(0, ctx, env)?.body())
    }
}

fn no_vars<S>(_: &str) -> Option<S> {
    None
}

/// Parses a constant field element such as `1/2+1/2*sqrt(-3)`.
pub fn parse_scalar<S: Scalar>(ctx: &S::Ctx, text: &str) -> Result<S, LiteralError> {
    Ok(Expr::parse(text)?.eval_scalar(ctx, &no_vars)?)
}

/// Parses a constant Grassmann element such as `3 + 2*e1*e2`.
pub fn parse_grassmann<S: Scalar>(rank: u8, ctx: &S::Ctx, text: &str) -> Result<Grassmann<S>, LiteralError> {
    Ok(Expr::parse(text)?.eval_grassmann(rank, ctx, &no_vars)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiteralError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl LiteralError {
    pub fn column(&self) -> usize {
        match self {
            LiteralError::Parse(p) => p.column,
            LiteralError::Eval(_) => 1,
        }
    }
}
