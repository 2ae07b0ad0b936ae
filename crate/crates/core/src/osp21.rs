//! Even 2|1×2|1 super-matrices and the group OSp(2|1).
//!
//! A super-matrix is written
//!
//! ```text
//! [ a  b | α ]
//! [ c  d | β ]
//! [ γ  δ | e ]
//! ```
//!
//! with a, b, c, d, e even and α, β, γ, δ odd.  Vectors of A^{2|1} are triples
//! `(a, b, α)` acted on from the left.

use std::fmt;
use std::ops::Mul;

use thiserror::Error;

use crate::grassmann::{Grassmann, GrassmannError};
use crate::scalars::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OspError {
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error("entry ({0}, {1}) has the wrong parity for an even super-matrix")]
    NotEven(usize, usize),
    #[error("block with zero body is not invertible")]
    NotInvertible,
    #[error("matrix is not in OSp(2|1): {0}")]
    NotOsp(OspViolation),
    #[error("matrix does not have determinant 1")]
    NotUnimodular,
    #[error("cosets pair to an element with zero body")]
    DegeneratePair,
}

/// The first defining relation that fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OspViolation {
    Parity,
    EvenDeterminant,
    OddNorm,
    FirstColumnRelation,
    SecondColumnRelation,
    Berezinian,
}

impl fmt::Display for OspViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OspViolation::Parity => "block parity",
            OspViolation::EvenDeterminant => "ad - bc - γδ = 1",
            OspViolation::OddNorm => "e² + 2αβ = 1",
            OspViolation::FirstColumnRelation => "aβ - cα - eγ = 0",
            OspViolation::SecondColumnRelation => "bβ - dα - eδ = 0",
            OspViolation::Berezinian => "Ber = 1",
        })
    }
}

fn is_odd_slot(i: usize, j: usize) -> bool {
    (i == 2) != (j == 2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuperMatrix<S: Scalar> {
    m: [[Grassmann<S>; 3]; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuperVector<S: Scalar> {
    pub a: Grassmann<S>,
    pub b: Grassmann<S>,
    pub alpha: Grassmann<S>,
}

impl<S: Scalar> SuperVector<S> {
    pub fn new(a: Grassmann<S>, b: Grassmann<S>, alpha: Grassmann<S>) -> Self {
        SuperVector { a, b, alpha }
    }

    /// Membership in A^{2|1}: correct parities and nonzero body.
    pub fn is_admissible(&self) -> bool {
        self.a.is_even() && self.b.is_even() && self.alpha.is_odd() && !(self.a.body().is_zero() && self.b.body().is_zero())
    }

    fn entry(&self, i: usize) -> &Grassmann<S> {
        match i {
            0 => &self.a,
            1 => &self.b,
            _ => &self.alpha,
        }
    }
}

impl<S: Scalar> fmt::Display for SuperVector<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.alpha)
    }
}

impl<S: Scalar> SuperMatrix<S> {
    /// Builds a matrix, checking that the A and D blocks are even and the B and
    /// C blocks odd.
    pub fn new(m: [[Grassmann<S>; 3]; 3]) -> Result<Self, OspError> {
        for (i, row) in m.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if x.rank() != m[0][0].rank() {
                    return Err(GrassmannError::RankMismatch(m[0][0].rank(), x.rank()).into());
                }
                let ok = if is_odd_slot(i, j) { x.is_odd() } else { x.is_even() };
                if !ok {
                    return Err(OspError::NotEven(i, j));
                }
            }
        }
        Ok(SuperMatrix { m })
    }

    pub fn identity(rank: u8, ctx: &S::Ctx) -> Self {
        SuperMatrix {
            m: std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { Grassmann::one(rank, ctx) } else { Grassmann::zero(rank, ctx) })
            }),
        }
    }

    /// Element of the unipotent subgroup N: `[[1, b, α], [0, 1, 0], [0, −α, 1]]`.
    pub fn unipotent(b: Grassmann<S>, alpha: Grassmann<S>) -> Result<Self, OspError> {
        let r = b.rank();
        let ctx = b.ctx().clone();
        let (o, z) = (Grassmann::one(r, &ctx), Grassmann::zero(r, &ctx));
        Self::new([
            [o.clone(), b, alpha.clone()],
            [z.clone(), o.clone(), z.clone()],
            [z.clone(), -alpha, o],
        ])
    }

    /// The counter-diagonal matrix `[[0, −1/c, 0], [c, 0, 0], [0, 0, 1]]`.
    pub fn counter_diagonal(c: Grassmann<S>) -> Result<Self, OspError> {
        let r = c.rank();
        let ctx = c.ctx().clone();
        let (o, z) = (Grassmann::one(r, &ctx), Grassmann::zero(r, &ctx));
        let ci = -c.inv()?;
        Self::new([[z.clone(), ci, z.clone()], [c, z.clone(), z.clone()], [z.clone(), z, o]])
    }

    pub fn embed_sl2(rank: u8, m: &[[S; 2]; 2]) -> Result<Self, OspError> {
        let ctx = m[0][0].ctx();
        let det = m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone();
        if det != S::one(&ctx) {
            return Err(OspError::NotUnimodular);
        }
        let mut g = Self::identity(rank, &ctx);
        for i in 0..2 {
            for j in 0..2 {
                g.m[i][j] = Grassmann::scalar(rank, m[i][j].clone());
            }
        }
        Ok(g)
    }

    /// Entrywise body of the upper-left block.
    pub fn body_map(&self) -> [[S; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.m[i][j].body()))
    }

    pub fn entry(&self, i: usize, j: usize) -> &Grassmann<S> {
        &self.m[i][j]
    }

    pub fn entries(&self) -> &[[Grassmann<S>; 3]; 3] {
        &self.m
    }

    pub fn rank(&self) -> u8 {
        self.m[0][0].rank()
    }

    pub fn ctx(&self) -> S::Ctx {
        self.m[0][0].ctx().clone()
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, OspError> {
        if self.rank() != rhs.rank() {
            return Err(GrassmannError::RankMismatch(self.rank(), rhs.rank()).into());
        }
        Ok(self.clone() * rhs.clone())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rank(), &self.ctx())
    }

    pub fn super_transpose(&self) -> Self {
        let m = &self.m;
        let mut out = self.clone();
        for i in 0..2 {
            for j in 0..2 {
                out.m[i][j] = m[j][i].clone();
            }
            // upper-right becomes Cᵗ, lower-left becomes −Bᵗ
            out.m[i][2] = m[2][i].clone();
            out.m[2][i] = -m[i][2].clone();
        }
        out
    }

    /// det(A − B·D⁻¹·C)·D⁻¹.
    pub fn berezinian(&self) -> Result<Grassmann<S>, OspError> {
        let m = &self.m;
        let dinv = m[2][2].inv().map_err(|_| OspError::NotInvertible)?;
        let det_a = m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone();
        if det_a.body().is_zero() {
            return Err(OspError::NotInvertible);
        }
        let x = |i: usize, j: usize| m[i][j].clone() - m[i][2].clone() * dinv.clone() * m[2][j].clone();
        let det = x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0);
        Ok(det * dinv)
    }

    /// Checks the expanded defining relations of OSp(2|1).
    pub fn osp_check(&self) -> Result<(), OspViolation> {
        if Self::new(self.m.clone()).is_err() {
            return Err(OspViolation::Parity);
        }
        let [[a, b, al], [c, d, be], [ga, de, e]] = &self.m;
        let r = a.rank();
        let ctx = a.ctx();
        let one = Grassmann::one(r, ctx);
        let two = Grassmann::from_i64(r, ctx, 2);
        let adbc = a.clone() * d.clone() - b.clone() * c.clone();
        if adbc.clone() - ga.clone() * de.clone() != one {
            return Err(OspViolation::EvenDeterminant);
        }
        if e.clone() * e.clone() + two.clone() * al.clone() * be.clone() != one {
            return Err(OspViolation::OddNorm);
        }
        if !(a.clone() * be.clone() - c.clone() * al.clone() - e.clone() * ga.clone()).is_zero() {
            return Err(OspViolation::FirstColumnRelation);
        }
        if !(b.clone() * be.clone() - d.clone() * al.clone() - e.clone() * de.clone()).is_zero() {
            return Err(OspViolation::SecondColumnRelation);
        }
        let ei = e.inv().map_err(|_| OspViolation::Berezinian)?;
        let ber = adbc * (one.clone() - two * al.clone() * be.clone() * ei.clone() * ei.clone()) * ei;
        if ber != one {
            return Err(OspViolation::Berezinian);
        }
        Ok(())
    }

    pub fn is_osp(&self) -> bool {
        self.osp_check().is_ok()
    }

    /// Closed-form inverse of an OSp(2|1) element.
    pub fn osp_inverse(&self) -> Result<Self, OspError> {
        self.osp_check().map_err(OspError::NotOsp)?;
        Ok(self.osp_inverse_unchecked())
    }

    pub(crate) fn osp_inverse_unchecked(&self) -> Self {
        let [[a, b, al], [c, d, be], [ga, de, e]] = self.m.clone();
        SuperMatrix { m: [[d, -b, de], [-c, a.clone(), -ga], [-be, al, e]] }
    }

    pub fn act(&self, v: &SuperVector<S>) -> Result<SuperVector<S>, OspError> {
        self.osp_check().map_err(OspError::NotOsp)?;
        Ok(self.apply(v))
    }

    /// Matrix-vector product without the membership check.
    pub fn apply(&self, v: &SuperVector<S>) -> SuperVector<S> {
        let row = |i: usize| {
            (0..3).fold(Grassmann::zero(self.rank(), &self.ctx()), |acc, j| acc + self.m[i][j].clone() * v.entry(j).clone())
        };
        SuperVector { a: row(0), b: row(1), alpha: row(2) }
    }

    /// The column `j` as a vector.
    pub fn column(&self, j: usize) -> SuperVector<S> {
        SuperVector { a: self.m[0][j].clone(), b: self.m[1][j].clone(), alpha: self.m[2][j].clone() }
    }
}

impl<S: Scalar> Mul for SuperMatrix<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                (0..3).fold(Grassmann::zero(self.rank(), &self.ctx()), |acc, k| acc + self.m[i][k].clone() * rhs.m[k][j].clone())
            })
        });
        SuperMatrix { m }
    }
}

impl<S: Scalar> fmt::Display for SuperMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.m.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "[{}, {}, {}]", row[0], row[1], row[2])?;
        }
        f.write_str("]")
    }
}

/// `⟨u, v⟩ = u.a·v.b − u.b·v.a − u.α·v.α`.
pub fn pair2<S: Scalar>(u: &SuperVector<S>, v: &SuperVector<S>) -> Grassmann<S> {
    u.a.clone() * v.b.clone() - u.b.clone() * v.a.clone() - u.alpha.clone() * v.alpha.clone()
}

/// Determinant of the matrix with columns u, v, w, minus 2·u.α·v.α·w.α.
pub fn pair3<S: Scalar>(u: &SuperVector<S>, v: &SuperVector<S>, w: &SuperVector<S>) -> Grassmann<S> {
    let minor = |x: &SuperVector<S>, y: &SuperVector<S>| x.a.clone() * y.b.clone() - y.a.clone() * x.b.clone();
    let det = u.alpha.clone() * minor(v, w) - v.alpha.clone() * minor(u, w) + w.alpha.clone() * minor(u, v);
    let two = Grassmann::from_i64(u.a.rank(), u.a.ctx(), 2);
    det - two * u.alpha.clone() * v.alpha.clone() * w.alpha.clone()
}

/// Coset representatives `g' ∈ gN`, `h' ∈ hN` with `g'⁻¹h'` counter-diagonal,
/// together with the pairing `c = ⟨gN, hN⟩`.
pub fn coset_normal_form<S: Scalar>(
    g: &SuperMatrix<S>,
    h: &SuperMatrix<S>,
) -> Result<(SuperMatrix<S>, SuperMatrix<S>, Grassmann<S>), OspError> {
    let k = g.osp_inverse()?.try_mul(h)?;
    h.osp_check().map_err(OspError::NotOsp)?;
    let c = k.m[1][0].clone();
    if c.body().is_zero() {
        return Err(OspError::DegeneratePair);
    }
    let ci = c.inv()?;
    // left factor kills the a and γ entries of the first column
    let n1 = SuperMatrix::unipotent(k.m[0][0].clone() * ci.clone(), -(k.m[2][0].clone() * ci.clone()))?;
    let k1 = n1.osp_inverse_unchecked() * k;
    // right factor kills d and β
    let n2 = SuperMatrix::unipotent(-(k1.m[1][1].clone() * ci.clone()), -(k1.m[1][2].clone() * ci))?;
    Ok((g.clone() * n1, h.clone() * n2, c))
}
