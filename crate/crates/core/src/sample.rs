//! Random elements for property tests and benchmarks.
//!
//! OSp elements are words of length at most 6 in embedded SL₂ generators and
//! unipotent elements of N with random odd entries.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use crate::grassmann::Grassmann;
use crate::osp21::SuperMatrix;
use crate::osp21::SuperVector;
use crate::scalars::Scalar;

/// A rational `n/d` with `|n| ≤ 9`, `1 ≤ d ≤ 5`.
pub fn scalar<S: Scalar, R: Rng + ?Sized>(rng: &mut R, ctx: &S::Ctx) -> S {
    let n: i64 = rng.gen_range(-9..=9);
    let d: i64 = rng.gen_range(1..=5);
    S::from_rational(ctx, &BigRational::new(BigInt::from(n), BigInt::from(d)))
}

pub fn nonzero_scalar<S: Scalar, R: Rng + ?Sized>(rng: &mut R, ctx: &S::Ctx) -> S {
    loop {
        let x = scalar::<S, R>(rng, ctx);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Coefficient masks of the given parity, or all masks when `parity` is `None`.
fn masks(rank: u8, parity: Option<bool>) -> impl Iterator<Item = u32> {
    (0u32..1 << rank).filter(move |m| parity.map_or(true, |odd| (m.count_ones() % 2 == 1) == odd))
}

fn element<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx, parity: Option<bool>) -> Grassmann<S> {
    let mut out = Grassmann::zero(rank, ctx);
    for mask in masks(rank, parity) {
        if rng.gen_bool(0.7) {
            let idx: Vec<usize> = (0..rank as usize).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            out = out + Grassmann::monomial(rank, &idx, scalar::<S, R>(rng, ctx));
        }
    }
    out
}

pub fn grassmann<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx) -> Grassmann<S> {
    element(rng, rank, ctx, None)
}

pub fn even<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx) -> Grassmann<S> {
    element(rng, rank, ctx, Some(false))
}

pub fn odd<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx) -> Grassmann<S> {
    element(rng, rank, ctx, Some(true))
}

/// Even element with nonzero body.
pub fn even_unit<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx) -> Grassmann<S> {
    let x = even(rng, rank, ctx);
    x.clone() - Grassmann::scalar(rank, x.body()) + Grassmann::scalar(rank, nonzero_scalar::<S, R>(rng, ctx))
}

pub fn super_vector<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx) -> SuperVector<S> {
    SuperVector::new(even(rng, rank, ctx), even(rng, rank, ctx), odd(rng, rank, ctx))
}

/// One generator: an elementary or diagonal SL₂ matrix, or an element of N.
pub fn osp_generator<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx) -> SuperMatrix<S> {
    let (one, zero) = (S::one(ctx), S::zero(ctx));
    let m = match rng.gen_range(0..4) {
        0 => [[one.clone(), scalar(rng, ctx)], [zero, one]],
        1 => [[one.clone(), zero], [scalar(rng, ctx), one]],
        2 => {
            let d: S = nonzero_scalar(rng, ctx);
            let di = d.inv().expect("nonzero");
            [[d, zero.clone()], [zero, di]]
        }
        _ => {
            let b = even(rng, rank, ctx);
            return SuperMatrix::unipotent(b, odd(rng, rank, ctx)).expect("N element");
        }
    };
    SuperMatrix::embed_sl2(rank, &m).expect("unimodular generator")
}

/// A product of 1 to 6 generators.
pub fn osp_element<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx) -> SuperMatrix<S> {
    let len = rng.gen_range(1..=6);
    (0..len).fold(SuperMatrix::identity(rank, ctx), |acc, _| acc * osp_generator(rng, rank, ctx))
}

/// An even super-matrix whose A and D blocks are invertible.
pub fn even_matrix<S: Scalar, R: Rng + ?Sized>(rng: &mut R, rank: u8, ctx: &S::Ctx) -> SuperMatrix<S> {
    loop {
        let m: [[Grassmann<S>; 3]; 3] = std::array::from_fn(|i| {
            std::array::from_fn(|j| if (i == 2) != (j == 2) { odd(rng, rank, ctx) } else { even(rng, rank, ctx) })
        });
        let det_a = m[0][0].body() * m[1][1].body() - m[0][1].body() * m[1][0].body();
        if !det_a.is_zero() && !m[2][2].body().is_zero() {
            return SuperMatrix::new(m).expect("parities by construction");
        }
    }
}
