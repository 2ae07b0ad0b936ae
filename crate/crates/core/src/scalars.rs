//! Scalar fields and Laurent polynomials.
//!
//! Three concrete fields implement [`Scalar`]: exact rationals, the exact
//! quadratic field ℚ(√d), and arbitrary-precision complex floats.  Everything
//! else in the crate is generic over `Scalar`.
//!
//! Elements carry a small context value (`Scalar::Ctx`) so that constants such
//! as zero and one can be built without a witness element.  Mixing elements of
//! different contexts (for example ℚ(√−3) with ℚ(√2)) is a programming error
//! and panics.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use astro_float::{BigFloat, RoundingMode};
use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("the zero polynomial has no normal form")]
    ZeroPolynomial,
    #[error("invalid field: {0}")]
    InvalidField(String),
}

/// A field element usable as a coefficient everywhere in the crate.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    type Ctx: Clone + fmt::Debug + PartialEq + Send + Sync + 'static;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn from_rational(ctx: &Self::Ctx, q: &BigRational) -> Self;
    fn is_zero(&self) -> bool;
    fn inv(&self) -> Result<Self, ScalarError>;

    /// Whether the field is exact (zero-test is decidable).
    fn is_exact() -> bool;

    /// Canonical sign used by polynomial normalization.  Only meaningful for
    /// nonzero elements.
    fn is_canonical_positive(&self) -> bool;

    /// A square root of the integer `d`, when it lies in the field.
    fn sqrt_int(ctx: &Self::Ctx, d: i64) -> Option<Self>;

    /// The imaginary unit, when it lies in the field.
    fn imaginary_unit(ctx: &Self::Ctx) -> Option<Self>;

    /// Complex conjugate (identity on real fields).
    fn conj(&self) -> Self;

    /// Approximate absolute value, used for pivoting and residual norms.
    fn magnitude(&self) -> f64;

    fn from_i64(ctx: &Self::Ctx, n: i64) -> Self {
        Self::from_rational(ctx, &BigRational::from_integer(BigInt::from(n)))
    }

    fn div(&self, rhs: &Self) -> Result<Self, ScalarError> {
        Ok(self.clone() * rhs.inv()?)
    }

    fn powi(&self, k: i64) -> Result<Self, ScalarError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(&self.ctx());
        let mut b = base;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b.clone();
            }
            e >>= 1;
            if e > 0 {
                b = b.clone() * b;
            }
        }
        Ok(acc)
    }
}

fn render_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

// ---------------------------------------------------------------------------
// Rationals

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rational(pub BigRational);

impl Rational {
    pub fn new(n: i64, d: i64) -> Self {
        Rational(BigRational::new(n.into(), d.into()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_rational(&self.0))
    }
}

impl Add for Rational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Rational(self.0 + rhs.0)
    }
}
impl Sub for Rational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Rational(self.0 - rhs.0)
    }
}
impl Mul for Rational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Rational(self.0 * rhs.0)
    }
}
impl Neg for Rational {
    type Output = Self;
    fn neg(self) -> Self {
        Rational(-self.0)
    }
}

impl Scalar for Rational {
    type Ctx = ();

    fn ctx(&self) {}
    fn zero(_: &()) -> Self {
        Rational(BigRational::zero())
    }
    fn one(_: &()) -> Self {
        Rational(BigRational::one())
    }
    fn from_rational(_: &(), q: &BigRational) -> Self {
        Rational(q.clone())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn inv(&self) -> Result<Self, ScalarError> {
        if self.0.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }
    fn is_exact() -> bool {
        true
    }
    fn is_canonical_positive(&self) -> bool {
        self.0.is_positive()
    }
    fn sqrt_int(_: &(), d: i64) -> Option<Self> {
        exact_isqrt(d).map(|r| Rational(BigRational::from_integer(r.into())))
    }
    fn imaginary_unit(_: &()) -> Option<Self> {
        None
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn magnitude(&self) -> f64 {
        self.0.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

fn exact_isqrt(d: i64) -> Option<i64> {
    if d < 0 {
        return None;
    }
    let r = (d as f64).sqrt().round() as i64;
    (r.saturating_sub(1)..=r + 1).find(|&s| s >= 0 && s.checked_mul(s) == Some(d))
}

// ---------------------------------------------------------------------------
// Quadratic field ℚ(√d)

/// The field ℚ(√d) for a square-free integer d ≠ 0, 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticField {
    d: i64,
}

impl QuadraticField {
    pub fn new(d: i64) -> Result<Self, ScalarError> {
        if d == 0 || d == 1 {
            return Err(ScalarError::InvalidField(format!("d = {d} does not give a quadratic field")));
        }
        let a = d.unsigned_abs();
        let mut p = 2u64;
        while p * p <= a {
            if a % (p * p) == 0 {
                return Err(ScalarError::InvalidField(format!("d = {d} is not square-free")));
            }
            p += 1;
        }
        Ok(QuadraticField { d })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn element(&self, a: BigRational, b: BigRational) -> Quadratic {
        Quadratic { a, b, d: self.d }
    }

    /// The element `(p/q) + (r/s)·√d`.
    pub fn from_parts(&self, p: i64, q: i64, r: i64, s: i64) -> Quadratic {
        self.element(BigRational::new(p.into(), q.into()), BigRational::new(r.into(), s.into()))
    }

    pub fn sqrt_d(&self) -> Quadratic {
        self.element(BigRational::zero(), BigRational::one())
    }
}

impl Default for QuadraticField {
    fn default() -> Self {
        QuadraticField { d: -3 }
    }
}

/// `a + b·√d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadratic {
    a: BigRational,
    b: BigRational,
    d: i64,
}

impl Quadratic {
    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }
    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }
    pub fn field(&self) -> QuadraticField {
        QuadraticField { d: self.d }
    }
    /// Galois conjugate `a − b·√d`.
    pub fn galois_conj(&self) -> Self {
        Quadratic { a: self.a.clone(), b: -self.b.clone(), d: self.d }
    }
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(self.d.into())
    }
    fn check(&self, other: &Self) {
        assert_eq!(self.d, other.d, "mixing elements of different quadratic fields");
    }
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let root = format!("sqrt({})", self.d);
        if self.b.is_zero() {
            return f.write_str(&render_rational(&self.a));
        }
        let b = if self.b.is_one() {
            root
        } else if (-self.b.clone()).is_one() {
            format!("-{root}")
        } else {
            format!("{}*{root}", render_rational(&self.b))
        };
        if self.a.is_zero() {
            f.write_str(&b)
        } else if b.starts_with('-') {
            write!(f, "{}{}", render_rational(&self.a), b)
        } else {
            write!(f, "{}+{}", render_rational(&self.a), b)
        }
    }
}

impl Add for Quadratic {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.check(&rhs);
        Quadratic { a: self.a + rhs.a, b: self.b + rhs.b, d: self.d }
    }
}
impl Sub for Quadratic {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.check(&rhs);
        Quadratic { a: self.a - rhs.a, b: self.b - rhs.b, d: self.d }
    }
}
impl Mul for Quadratic {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.check(&rhs);
        let d = BigRational::from_integer(self.d.into());
        Quadratic {
            a: &self.a * &rhs.a + &self.b * &rhs.b * d,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
            d: self.d,
        }
    }
}
impl Neg for Quadratic {
    type Output = Self;
    fn neg(self) -> Self {
        Quadratic { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Scalar for Quadratic {
    type Ctx = QuadraticField;

    fn ctx(&self) -> QuadraticField {
        self.field()
    }
    fn zero(ctx: &QuadraticField) -> Self {
        ctx.element(BigRational::zero(), BigRational::zero())
    }
    fn one(ctx: &QuadraticField) -> Self {
        ctx.element(BigRational::one(), BigRational::zero())
    }
    fn from_rational(ctx: &QuadraticField, q: &BigRational) -> Self {
        ctx.element(q.clone(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let n = self.norm();
        Ok(Quadratic { a: &self.a / &n, b: -(&self.b / &n), d: self.d })
    }
    fn is_exact() -> bool {
        true
    }
    fn is_canonical_positive(&self) -> bool {
        match self.a.cmp(&BigRational::zero()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.b.is_positive(),
        }
    }
    fn sqrt_int(ctx: &QuadraticField, k: i64) -> Option<Self> {
        if let Some(r) = exact_isqrt(k) {
            return Some(Self::from_i64(ctx, r));
        }
        if k % ctx.d == 0 {
            if let Some(r) = exact_isqrt(k / ctx.d) {
                return Some(ctx.element(BigRational::zero(), BigRational::from_integer(r.into())));
            }
        }
        None
    }
    fn imaginary_unit(ctx: &QuadraticField) -> Option<Self> {
        (ctx.d == -1).then(|| ctx.sqrt_d())
    }
    fn conj(&self) -> Self {
        if self.d < 0 {
            self.galois_conj()
        } else {
            self.clone()
        }
    }
    fn magnitude(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::INFINITY);
        let b = self.b.to_f64().unwrap_or(f64::INFINITY);
        let r = (self.d.abs() as f64).sqrt();
        if self.d < 0 {
            a.hypot(b * r)
        } else {
            (a + b * r).abs()
        }
    }
}

// ---------------------------------------------------------------------------
// Arbitrary-precision complex floats

const RM: RoundingMode = RoundingMode::ToEven;

/// Precision and zero tolerance of a complex float field.
#[derive(Clone, Debug)]
pub struct ComplexField {
    bits: usize,
    tol: f64,
    tol_big: BigFloat,
}

impl PartialEq for ComplexField {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits && self.tol == other.tol
    }
}

impl ComplexField {
    pub const DEFAULT_TOLERANCE: f64 = 1e-30;

    pub fn new(bits: usize) -> Self {
        Self::with_tolerance(bits, Self::DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(bits: usize, tol: f64) -> Self {
        let bits = bits.max(64);
        ComplexField { bits, tol, tol_big: BigFloat::from_f64(tol, bits) }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn from_f64(&self, re: f64, im: f64) -> Complex {
        Complex {
            re: BigFloat::from_f64(re, self.bits),
            im: BigFloat::from_f64(im, self.bits),
            field: self.clone(),
        }
    }

    fn real(&self, x: BigFloat) -> Complex {
        Complex { re: x, im: BigFloat::from_i8(0, self.bits), field: self.clone() }
    }

    fn bigint(&self, n: &BigInt) -> BigFloat {
        let p = self.bits;
        let (sign, digits) = n.to_u64_digits();
        let base = BigFloat::from_u128(1u128 << 64, p);
        let mut acc = BigFloat::from_u8(0, p);
        for w in digits.iter().rev() {
            acc = acc.mul(&base, p, RM).add(&BigFloat::from_u64(*w, p), p, RM);
        }
        if sign == Sign::Minus {
            acc = acc.neg();
        }
        acc
    }
}

impl Default for ComplexField {
    fn default() -> Self {
        ComplexField::new(256)
    }
}

#[derive(Clone, Debug)]
pub struct Complex {
    re: BigFloat,
    im: BigFloat,
    field: ComplexField,
}

fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let (Some(m), Some(e)) = (x.mantissa_digits(), x.exponent()) else {
        return f64::NAN;
    };
    let top = *m.last().unwrap_or(&0) as f64 / 2f64.powi(64);
    let v = top * 2f64.powi(e);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

impl Complex {
    pub fn re(&self) -> &BigFloat {
        &self.re
    }
    pub fn im(&self) -> &BigFloat {
        &self.im
    }
    /// The same value in another field (precision and zero tolerance).
    pub fn with_field(&self, field: &ComplexField) -> Complex {
        Complex { re: self.re.clone(), im: self.im.clone(), field: field.clone() }
    }
    pub fn re_f64(&self) -> f64 {
        big_to_f64(&self.re)
    }
    pub fn im_f64(&self) -> f64 {
        big_to_f64(&self.im)
    }
    fn small(&self, x: &BigFloat) -> bool {
        x.abs().cmp(&self.field.tol_big).is_some_and(|o| o <= 0)
    }
    fn norm_sqr(&self) -> BigFloat {
        let p = self.field.bits;
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }
    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.field.bits;
        let r = self.norm_sqr().sqrt(p, RM);
        let two = BigFloat::from_u8(2, p);
        let re = r.add(&self.re, p, RM).div(&two, p, RM);
        let re = if re.is_negative() { BigFloat::from_u8(0, p) } else { re.sqrt(p, RM) };
        let im = r.sub(&self.re, p, RM).div(&two, p, RM);
        let mut im = if im.is_negative() { BigFloat::from_u8(0, p) } else { im.sqrt(p, RM) };
        if self.im.is_negative() {
            im = im.neg();
        }
        Complex { re, im, field: self.field.clone() }
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.small(&self.im) {
            return write!(f, "{}", self.re);
        }
        if self.im.is_negative() {
            write!(f, "{}-{}*i", self.re, self.im.abs())
        } else {
            write!(f, "{}+{}*i", self.re, self.im)
        }
    }
}

/// Equality up to the field's absolute tolerance.
impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_zero()
    }
}

impl Add for Complex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let p = self.field.bits;
        Complex { re: self.re.add(&rhs.re, p, RM), im: self.im.add(&rhs.im, p, RM), field: self.field }
    }
}
impl Sub for Complex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let p = self.field.bits;
        Complex { re: self.re.sub(&rhs.re, p, RM), im: self.im.sub(&rhs.im, p, RM), field: self.field }
    }
}
impl Mul for Complex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let p = self.field.bits;
        let re = self.re.mul(&rhs.re, p, RM).sub(&self.im.mul(&rhs.im, p, RM), p, RM);
        let im = self.re.mul(&rhs.im, p, RM).add(&self.im.mul(&rhs.re, p, RM), p, RM);
        Complex { re, im, field: self.field }
    }
}
impl Neg for Complex {
    type Output = Self;
    fn neg(self) -> Self {
        Complex { re: self.re.neg(), im: self.im.clone().neg(), field: self.field }
    }
}

impl Scalar for Complex {
    type Ctx = ComplexField;

    fn ctx(&self) -> ComplexField {
        self.field.clone()
    }
    fn zero(ctx: &ComplexField) -> Self {
        ctx.real(BigFloat::from_u8(0, ctx.bits))
    }
    fn one(ctx: &ComplexField) -> Self {
        ctx.real(BigFloat::from_u8(1, ctx.bits))
    }
    fn from_rational(ctx: &ComplexField, q: &BigRational) -> Self {
        let n = ctx.bigint(q.numer());
        let d = ctx.bigint(q.denom());
        ctx.real(n.div(&d, ctx.bits, RM))
    }
    fn is_zero(&self) -> bool {
        self.small(&self.re) && self.small(&self.im)
    }
    fn inv(&self) -> Result<Self, ScalarError> {
        if self.re.is_zero() && self.im.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let p = self.field.bits;
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Complex { re: self.re.div(&n, p, RM), im: self.im.clone().neg().div(&n, p, RM), field: self.field.clone() })
    }
    fn is_exact() -> bool {
        false
    }
    fn is_canonical_positive(&self) -> bool {
        if self.small(&self.re) {
            self.im.is_positive()
        } else {
            self.re.is_positive()
        }
    }
    fn sqrt_int(ctx: &ComplexField, d: i64) -> Option<Self> {
        let r = BigFloat::from_u64(d.unsigned_abs(), ctx.bits).sqrt(ctx.bits, RM);
        Some(if d < 0 { Complex { re: BigFloat::from_u8(0, ctx.bits), im: r, field: ctx.clone() } } else { ctx.real(r) })
    }
    fn imaginary_unit(ctx: &ComplexField) -> Option<Self> {
        Some(ctx.from_f64(0.0, 1.0))
    }
    fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: self.im.clone().neg(), field: self.field.clone() }
    }
    fn magnitude(&self) -> f64 {
        self.re_f64().hypot(self.im_f64())
    }
}

// ---------------------------------------------------------------------------
// Dual numbers, for exact Jacobians in the Newton solver

/// `v + d·h` with `h² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S: Scalar> {
    pub v: S,
    pub d: S,
}

impl<S: Scalar> Dual<S> {
    pub fn constant(v: S) -> Self {
        let d = S::zero(&v.ctx());
        Dual { v, d }
    }
    pub fn variable(v: S) -> Self {
        let d = S::one(&v.ctx());
        Dual { v, d }
    }
}

impl<S: Scalar> fmt::Display for Dual<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})*h", self.v, self.d)
    }
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Dual { v: self.v + rhs.v, d: self.d + rhs.d }
    }
}
impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Dual { v: self.v - rhs.v, d: self.d - rhs.d }
    }
}
impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Dual { d: self.v.clone() * rhs.d + self.d * rhs.v.clone(), v: self.v * rhs.v }
    }
}
impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { v: -self.v, d: -self.d }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    type Ctx = S::Ctx;

    fn ctx(&self) -> S::Ctx {
        self.v.ctx()
    }
    fn zero(ctx: &S::Ctx) -> Self {
        Dual::constant(S::zero(ctx))
    }
    fn one(ctx: &S::Ctx) -> Self {
        Dual::constant(S::one(ctx))
    }
    fn from_rational(ctx: &S::Ctx, q: &BigRational) -> Self {
        Dual::constant(S::from_rational(ctx, q))
    }
    fn is_zero(&self) -> bool {
        self.v.is_zero() && self.d.is_zero()
    }
    fn inv(&self) -> Result<Self, ScalarError> {
        let vi = self.v.inv()?;
        let d = -(self.d.clone() * vi.clone() * vi.clone());
        Ok(Dual { v: vi, d })
    }
    fn is_exact() -> bool {
        S::is_exact()
    }
    fn is_canonical_positive(&self) -> bool {
        self.v.is_canonical_positive()
    }
    fn sqrt_int(ctx: &S::Ctx, d: i64) -> Option<Self> {
        S::sqrt_int(ctx, d).map(Dual::constant)
    }
    fn imaginary_unit(ctx: &S::Ctx) -> Option<Self> {
        S::imaginary_unit(ctx).map(Dual::constant)
    }
    fn conj(&self) -> Self {
        Dual { v: self.v.conj(), d: self.d.conj() }
    }
    fn magnitude(&self) -> f64 {
        self.v.magnitude()
    }
}

// ---------------------------------------------------------------------------
// Laurent polynomials

/// A Laurent polynomial in `t` with no stored zero coefficients.
#[derive(Clone, Debug)]
pub struct LaurentPoly<S: Scalar> {
    terms: BTreeMap<i64, S>,
    ctx: S::Ctx,
}

impl<S: Scalar> PartialEq for LaurentPoly<S> {
    fn eq(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_zero()
    }
}

impl<S: Scalar> LaurentPoly<S> {
    pub fn zero(ctx: &S::Ctx) -> Self {
        LaurentPoly { terms: BTreeMap::new(), ctx: ctx.clone() }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(c, 0)
    }

    pub fn monomial(c: S, k: i64) -> Self {
        let mut p = Self::zero(&c.ctx());
        p.add_term(k, c);
        p
    }

    /// The variable `t`.
    pub fn t(ctx: &S::Ctx) -> Self {
        Self::monomial(S::one(ctx), 1)
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs; repeated
    /// exponents accumulate.
    pub fn from_terms(ctx: &S::Ctx, terms: impl IntoIterator<Item = (i64, S)>) -> Self {
        let mut p = Self::zero(ctx);
        for (k, c) in terms {
            p.add_term(k, c);
        }
        p
    }

    fn add_term(&mut self, k: i64, c: S) {
        let v = match self.terms.remove(&k) {
            Some(old) => old + c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(k, v);
        }
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &S)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, k: i64) -> S {
        self.terms.get(&k).cloned().unwrap_or_else(|| S::zero(&self.ctx))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// `max exponent − min exponent`; zero for the zero polynomial.
    pub fn span(&self) -> i64 {
        match (self.min_exp(), self.max_exp()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(), ctx: self.ctx.clone() }
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::from_terms(&self.ctx, self.terms.iter().map(|(k, c)| (*k, c.clone() * s.clone())))
    }

    pub fn eval(&self, t: &S) -> Result<S, ScalarError> {
        let mut acc = S::zero(&self.ctx);
        for (k, c) in &self.terms {
            acc = acc + c.clone() * t.powi(*k)?;
        }
        Ok(acc)
    }

    /// Value at `t = 1`, the coefficient sum.
    pub fn eval_one(&self) -> S {
        self.terms.values().fold(S::zero(&self.ctx), |a, c| a + c.clone())
    }

    pub fn leading_coeff(&self) -> Option<&S> {
        self.terms.values().next_back()
    }

    /// Representative of `p` modulo `±t^k`: lowest exponent 0 and lowest
    /// coefficient canonical-positive.
    pub fn normalize(&self) -> Result<Self, ScalarError> {
        let (k, c) = self.terms.iter().next().ok_or(ScalarError::ZeroPolynomial)?;
        let p = self.shift(-k);
        Ok(if c.is_canonical_positive() { p } else { -p })
    }

    /// Exact quotient `self / rhs`, assuming `rhs` divides `self` in the
    /// Laurent ring.  The remainder, which is zero in exact arithmetic, is
    /// discarded.
    pub fn div_exact(&self, rhs: &Self) -> Result<Self, ScalarError> {
        let (Some(lo), Some(hi)) = (rhs.min_exp(), rhs.max_exp()) else {
            return Err(ScalarError::DivisionByZero);
        };
        let lead_inv = rhs.terms[&hi].inv()?;
        let mut rem = self.clone();
        let mut q = Self::zero(&self.ctx);
        let lo_bound = self.min_exp().unwrap_or(0) - lo;
        while let Some(top) = rem.max_exp() {
            let k = top - hi;
            if k < lo_bound {
                break;
            }
            let c = rem.terms[&top].clone() * lead_inv.clone();
            let sub = rhs.scale(&c).shift(k);
            rem = rem - sub;
            rem.terms.remove(&top);
            q.add_term(k, c);
        }
        Ok(q)
    }
}

impl<S: Scalar> fmt::Display for LaurentPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.terms.iter().rev() {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})*t")?,
                _ => write!(f, "({c})*t^{k}")?,
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Add for LaurentPoly<S> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
        self
    }
}
impl<S: Scalar> Sub for LaurentPoly<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}
impl<S: Scalar> Neg for LaurentPoly<S> {
    type Output = Self;
    fn neg(self) -> Self {
        LaurentPoly { terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect(), ctx: self.ctx }
    }
}
impl<S: Scalar> Mul for LaurentPoly<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a + b, x.clone() * y.clone());
            }
        }
        out
    }
}

fn poly_weight<S: Scalar>(p: &LaurentPoly<S>) -> f64 {
    p.terms().map(|(_, c)| c.magnitude()).fold(0.0, f64::max)
}

/// Determinant over the Laurent ring by fraction-free (Bareiss) elimination.
pub fn laurent_det<S: Scalar>(ctx: &S::Ctx, m: &[Vec<LaurentPoly<S>>]) -> LaurentPoly<S> {
    let n = m.len();
    let one = LaurentPoly::constant(S::one(ctx));
    if n == 0 {
        return one;
    }
    let mut a: Vec<Vec<LaurentPoly<S>>> = m.to_vec();
    let mut prev = one;
    let mut negate = false;
    for k in 0..n {
        let candidates = (k..n).filter(|&i| !a[i][k].is_zero());
        let pivot = if S::is_exact() {
            candidates.min_by_key(|&i| (a[i][k].terms.len(), i))
        } else {
            candidates.max_by(|&i, &j| poly_weight(&a[i][k]).total_cmp(&poly_weight(&a[j][k])))
        };
        let Some(p) = pivot else {
            return LaurentPoly::zero(ctx);
        };
        if p != k {
            a.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                a[i][j] = num.div_exact(&prev).expect("Bareiss pivot is nonzero");
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

// ---------------------------------------------------------------------------
// Dense linear algebra over a field

fn pivot_row<S: Scalar>(a: &[Vec<S>], col: usize, from: usize) -> Option<usize> {
    let nz = (from..a.len()).filter(|&i| !a[i][col].is_zero());
    if S::is_exact() {
        nz.min()
    } else {
        nz.max_by(|&i, &j| a[i][col].magnitude().total_cmp(&a[j][col].magnitude()))
    }
}

/// Determinant by Gaussian elimination.
pub fn det<S: Scalar>(ctx: &S::Ctx, m: &[Vec<S>]) -> S {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = S::one(ctx);
    for k in 0..n {
        let Some(p) = pivot_row(&a, k, k) else {
            return S::zero(ctx);
        };
        if p != k {
            a.swap(p, k);
            d = -d;
        }
        let inv = a[k][k].inv().expect("pivot is nonzero");
        for i in k + 1..n {
            let f = a[i][k].clone() * inv.clone();
            for j in k..n {
                let v = a[i][j].clone() - f.clone() * a[k][j].clone();
                a[i][j] = v;
            }
        }
        d = d * a[k][k].clone();
    }
    d
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref<S: Scalar>(a: &mut [Vec<S>]) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = pivot_row(a, c, r) else {
            continue;
        };
        a.swap(p, r);
        let inv = a[r][c].inv().expect("pivot is nonzero");
        for j in 0..cols {
            a[r][j] = a[r][j].clone() * inv.clone();
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let v = a[i][j].clone() - f.clone() * a[r][j].clone();
                    a[i][j] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<S: Scalar>(m: &[Vec<S>]) -> usize {
    rref(&mut m.to_vec()).len()
}

/// A basis of the right null space `{v : m·v = 0}`.
pub fn nullspace<S: Scalar>(ctx: &S::Ctx, m: &[Vec<S>]) -> Vec<Vec<S>> {
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(ctx); cols];
            v[f] = S::one(ctx);
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves the square system `m·x = b`.
pub fn solve<S: Scalar>(ctx: &S::Ctx, m: &[Vec<S>], b: &[S]) -> Option<Vec<S>> {
    let n = m.len();
    let mut a: Vec<Vec<S>> = m.iter().zip(b).map(|(row, bi)| {
        let mut r = row.clone();
        r.push(bi.clone());
        r
    }).collect();
    let pivots = rref(&mut a);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    let _ = ctx;
    Some(a.into_iter().map(|r| r[n].clone()).collect())
}

pub fn mat_vec<S: Scalar>(ctx: &S::Ctx, m: &[Vec<S>], v: &[S]) -> Vec<S> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(S::zero(ctx), |acc, (a, b)| acc + a.clone() * b.clone()))
        .collect()
}
