//! Finite-rank Grassmann algebras over a scalar field.
//!
//! An element is a sparse map from monomials ε_{i₁}⋯ε_{i_k} (i₁ < ⋯ < i_k) to
//! nonzero coefficients.  Monomials are stored as bitmasks, bit `i − 1` standing
//! for the generator ε_i.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalars::{Scalar, ScalarError};

/// Largest supported number of generators.
pub const MAX_RANK: u8 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrassmannError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(u8, u8),
    #[error("element with zero body is not invertible")]
    NotInvertible,
    #[error("rank {0} exceeds the supported maximum of {MAX_RANK}")]
    RankTooLarge(u8),
    #[error("generator e{0} does not exist in rank {1}")]
    NoSuchGenerator(usize, u8),
}

impl From<ScalarError> for GrassmannError {
    fn from(_: ScalarError) -> Self {
        GrassmannError::NotInvertible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Zero,
    Even,
    Odd,
    Mixed,
}

#[derive(Clone, Debug)]
pub struct Grassmann<S: Scalar> {
    rank: u8,
    ctx: S::Ctx,
    terms: BTreeMap<u32, S>,
}

fn reorder_sign(a: u32, b: u32) -> bool {
    // parity of the number of pairs (i in a, j in b) with i > j
    let mut odd = false;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = a & !((2u32 << j) - 1);
        if above.count_ones() % 2 == 1 {
            odd = !odd;
        }
    }
    odd
}

impl<S: Scalar> Grassmann<S> {
    pub fn zero(rank: u8, ctx: &S::Ctx) -> Self {
        assert!(rank <= MAX_RANK, "Grassmann rank {rank} exceeds {MAX_RANK}");
        Grassmann { rank, ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn try_zero(rank: u8, ctx: &S::Ctx) -> Result<Self, GrassmannError> {
        if rank > MAX_RANK {
            return Err(GrassmannError::RankTooLarge(rank));
        }
        Ok(Self::zero(rank, ctx))
    }

    pub fn one(rank: u8, ctx: &S::Ctx) -> Self {
        Self::scalar(rank, S::one(ctx))
    }

    pub fn scalar(rank: u8, s: S) -> Self {
        let mut g = Self::zero(rank, &s.ctx());
        g.add_term(0, s);
        g
    }

    pub fn from_i64(rank: u8, ctx: &S::Ctx, n: i64) -> Self {
        Self::scalar(rank, S::from_i64(ctx, n))
    }

    /// The generator ε_i, 1-based.
    pub fn generator(rank: u8, ctx: &S::Ctx, i: usize) -> Result<Self, GrassmannError> {
        if i == 0 || i > rank as usize {
            return Err(GrassmannError::NoSuchGenerator(i, rank));
        }
        let mut g = Self::zero(rank, ctx);
        g.add_term(1 << (i - 1), S::one(ctx));
        Ok(g)
    }

    /// `c·ε_{i₁}⋯ε_{i_k}` for the listed 1-based indices, in the given order.
    pub fn monomial(rank: u8, indices: &[usize], c: S) -> Self {
        let ctx = c.ctx();
        let mut g = Self::scalar(rank, c);
        for &i in indices {
            g = g * Self::generator(rank, &ctx, i).expect("generator index in range");
        }
        g
    }

    fn add_term(&mut self, mask: u32, c: S) {
        let v = match self.terms.remove(&mask) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(mask, v);
        }
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the empty monomial.
    pub fn body(&self) -> S {
        self.coeff(0)
    }

    pub fn coeff(&self, mask: u32) -> S {
        self.terms.get(&mask).cloned().unwrap_or_else(|| S::zero(&self.ctx))
    }

    /// Coefficient of ε_{i₁}⋯ε_{i_k} for increasing 1-based indices.
    pub fn coeff_of(&self, indices: &[usize]) -> S {
        self.coeff(indices.iter().fold(0, |m, &i| m | 1 << (i - 1)))
    }

    /// `(mask, coefficient)` pairs in rendering order.
    pub fn terms(&self) -> Vec<(u32, &S)> {
        let mut v: Vec<(u32, &S)> = self.terms.iter().map(|(m, c)| (*m, c)).collect();
        v.sort_by_key(|(m, _)| (m.count_ones(), std::cmp::Reverse(m.reverse_bits())));
        v
    }

    pub fn parity(&self) -> Parity {
        let even = self.terms.keys().any(|m| m.count_ones() % 2 == 0);
        let odd = self.terms.keys().any(|m| m.count_ones() % 2 == 1);
        match (even, odd) {
            (false, false) => Parity::Zero,
            (true, false) => Parity::Even,
            (false, true) => Parity::Odd,
            (true, true) => Parity::Mixed,
        }
    }

    pub fn is_even(&self) -> bool {
        matches!(self.parity(), Parity::Zero | Parity::Even)
    }

    pub fn is_odd(&self) -> bool {
        matches!(self.parity(), Parity::Zero | Parity::Odd)
    }

    pub fn even_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 0)
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|m| m.count_ones() % 2 == 1)
    }

    fn filter(&self, keep: impl Fn(u32) -> bool) -> Self {
        Grassmann {
            rank: self.rank,
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|(m, _)| keep(**m)).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut g = Self::zero(self.rank, &self.ctx);
        for (m, c) in &self.terms {
            g.add_term(*m, c.clone() * s.clone());
        }
        g
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, GrassmannError> {
        self.check(rhs)?;
        Ok(self.clone() + rhs.clone())
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, GrassmannError> {
        self.check(rhs)?;
        Ok(self.clone() * rhs.clone())
    }

    fn check(&self, rhs: &Self) -> Result<(), GrassmannError> {
        if self.rank != rhs.rank {
            return Err(GrassmannError::RankMismatch(self.rank, rhs.rank));
        }
        Ok(())
    }

    /// Multiplicative inverse via the terminating geometric series in the
    /// nilpotent part.
    pub fn inv(&self) -> Result<Self, GrassmannError> {
        let b = self.body();
        let bi = b.inv().map_err(|_| GrassmannError::NotInvertible)?;
        // self = b(1 + n), n nilpotent
        let n = (self.clone() - Self::scalar(self.rank, b)).scale(&bi);
        let mut acc = Self::one(self.rank, &self.ctx);
        let mut power = Self::one(self.rank, &self.ctx);
        let minus_n = -n;
        loop {
            power = power * minus_n.clone();
            if power.is_zero() {
                break;
            }
            acc = acc + power.clone();
        }
        Ok(acc.scale(&bi))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self, GrassmannError> {
        self.check(rhs)?;
        Ok(self.clone() * rhs.inv()?)
    }

    pub fn powi(&self, k: i64) -> Result<Self, GrassmannError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.rank, &self.ctx);
        for _ in 0..k.unsigned_abs() {
            acc = acc * base.clone();
        }
        Ok(acc)
    }

    /// Reinterprets the element in an algebra with more generators.
    pub fn with_rank(&self, rank: u8) -> Result<Self, GrassmannError> {
        if rank > MAX_RANK {
            return Err(GrassmannError::RankTooLarge(rank));
        }
        if self.terms.keys().any(|m| (32 - m.leading_zeros()) as u8 > rank) {
            return Err(GrassmannError::RankMismatch(self.rank, rank));
        }
        Ok(Grassmann { rank, ctx: self.ctx.clone(), terms: self.terms.clone() })
    }

    /// Applies a field map to every coefficient.
    pub fn map<T: Scalar>(&self, ctx: &T::Ctx, f: impl Fn(&S) -> T) -> Grassmann<T> {
        let mut g = Grassmann::zero(self.rank, ctx);
        for (m, c) in &self.terms {
            g.add_term(*m, f(c));
        }
        g
    }
}

impl<S: Scalar> PartialEq for Grassmann<S> {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && (self.clone() - other.clone()).is_zero()
    }
}

fn render_monomial(mask: u32) -> String {
    (0..32).filter(|i| mask & (1 << i) != 0).map(|i| format!("e{}", i + 1)).collect::<Vec<_>>().join("*")
}

impl<S: Scalar> fmt::Display for Grassmann<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (mask, c)) in self.terms().into_iter().enumerate() {
            let s = c.to_string();
            let compound = s.len() > 1 && s[1..].contains(['+', '-']);
            let (neg, mag) = match s.strip_prefix('-') {
                Some(rest) if !compound => (true, rest.to_string()),
                _ if compound => (false, format!("({s})")),
                _ => (false, s.clone()),
            };
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if mask == 0 {
                f.write_str(&mag)?;
            } else if mag == "1" {
                f.write_str(&render_monomial(mask))?;
            } else {
                write!(f, "{}*{}", mag, render_monomial(mask))?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Add for Grassmann<S> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.rank, rhs.rank, "Grassmann rank mismatch");
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<S: Scalar> Sub for Grassmann<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for Grassmann<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Grassmann { rank: self.rank, ctx: self.ctx, terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl<S: Scalar> Mul for Grassmann<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.rank, rhs.rank, "Grassmann rank mismatch");
        let mut out = Self::zero(self.rank, &self.ctx);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                if a & b != 0 {
                    continue;
                }
                let p = x.clone() * y.clone();
                out.add_term(a | b, if reorder_sign(*a, *b) { -p } else { p });
            }
        }
        out
    }
}
