//! Face matrices, the 1-loop invariant and the 1-loop polynomial.
//!
//! For each tetrahedron the four odd equations, with signs `(E0, −E1, E2, −E3)`,
//! form a 4×4 skew matrix.  An edge choice `e_Δ = [i, j]` keeps the two rows
//! of the faces containing `e_Δ`, i.e. the faces opposite the other two
//! vertices.  Columns are face classes; two faces of one tetrahedron in the
//! same class add into one column.  In the twisted matrix the entry of
//! `θ_m` gets the monomial `t^k` with `k` the lift exponent of slot `m`.
//!
//! ```text
//! δ = det F / (∏ c(edge classes) · ∏_Δ κ(e_Δ)·c(e_Δ))
//! ```

use thiserror::Error;

use crate::grassmann::Grassmann;
use crate::ptolemy::{
    deformed_ptolemy_residuals, sigma_residuals, super_residuals, tet_odd_coefficients, PtolemyError, SigmaCocycle,
    SuperPtolemy, TetCoefficients,
};
use crate::scalars::{laurent_det, nullspace, LaurentPoly, Scalar, ScalarError};
use crate::triangulation::{edge_index, lift_exponents, FaceWeights, Triangulation, EDGES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OneLoopError {
    #[error("edge choice has {got} entries for {tets} tetrahedra")]
    ChoiceLength { got: usize, tets: usize },
    #[error("edge choice entry {0} is not a local edge")]
    ChoiceInvalid(String),
    #[error("twisted output requested without face weights")]
    WeightsMissing,
    #[error("edge values do not satisfy the Ptolemy relation of tetrahedron {0}")]
    NotPtolemy(usize),
    #[error("face matrix prefactor vanishes")]
    ZeroPrefactor,
    #[error(transparent)]
    Ptolemy(#[from] PtolemyError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// One local edge (index into `EDGES`) per tetrahedron.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeChoice(pub Vec<usize>);

impl EdgeChoice {
    pub fn uniform(tets: usize, edge: usize) -> Self {
        EdgeChoice(vec![edge; tets])
    }

    /// Parses entries like `03` or `[0,3]`, comma or whitespace separated.
    pub fn parse(text: &str) -> Result<Self, OneLoopError> {
        let cleaned: String = text.chars().filter(|c| !matches!(c, '[' | ']')).collect();
        let digits: Vec<usize> = cleaned
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(|| OneLoopError::ChoiceInvalid(c.to_string())))
            .collect::<Result<_, _>>()?;
        if digits.len() % 2 != 0 {
            return Err(OneLoopError::ChoiceInvalid(text.to_string()));
        }
        digits
            .chunks(2)
            .map(|p| {
                if p[0] < 4 && p[1] < 4 && p[0] != p[1] {
                    Ok(edge_index(p[0], p[1]))
                } else {
                    Err(OneLoopError::ChoiceInvalid(format!("{}{}", p[0], p[1])))
                }
            })
            .collect::<Result<_, _>>()
            .map(EdgeChoice)
    }

    /// All `6^n` choices in lexicographic order.
    pub fn all(tets: usize) -> impl Iterator<Item = EdgeChoice> {
        let total = 6usize.pow(tets as u32);
        (0..total).map(move |mut k| {
            let mut v = vec![0; tets];
            for slot in v.iter_mut().rev() {
                *slot = k % 6;
                k /= 6;
            }
            EdgeChoice(v)
        })
    }

    pub fn labels(&self) -> Vec<String> {
        self.0.iter().map(|&e| format!("{}{}", EDGES[e].0, EDGES[e].1)).collect()
    }

    fn check(&self, tets: usize) -> Result<(), OneLoopError> {
        if self.0.len() != tets {
            return Err(OneLoopError::ChoiceLength { got: self.0.len(), tets });
        }
        if let Some(&e) = self.0.iter().find(|&&e| e >= 6) {
            return Err(OneLoopError::ChoiceInvalid(e.to_string()));
        }
        Ok(())
    }
}

/// Faces (by opposite vertex) containing local edge `e`, increasing.
pub fn selected_faces(e: usize) -> [usize; 2] {
    let (i, j) = EDGES[e];
    let rest: Vec<usize> = (0..4).filter(|&v| v != i && v != j).collect();
    [rest[0], rest[1]]
}

/// The 4×4 matrix with rows `(E0, −E1, E2, −E3)` and columns `θ0..θ3`, for
/// local edge values in `EDGES` order.
pub fn tet_face_matrix<S: Scalar>(c: &[S; 6]) -> [[S; 4]; 4] {
    let ctx = c[0].ctx();
    tet_face_matrix_deformed(c, &TetCoefficients::trivial(&ctx))
}

pub fn tet_face_matrix_deformed<S: Scalar>(c: &[S; 6], k: &TetCoefficients<S>) -> [[S; 4]; 4] {
    let zero = S::zero(&c[0].ctx());
    std::array::from_fn(|f| {
        let row = tet_odd_coefficients(c, &k.kappa, f, zero.clone());
        if f % 2 == 1 {
            row.map(|x| -x)
        } else {
            row
        }
    })
}

/// The selected face equations over the Laurent ring together with the
/// normalizing prefactor.
#[derive(Debug, Clone)]
pub struct FaceMatrix<S: Scalar> {
    pub rows: Vec<Vec<LaurentPoly<S>>>,
    /// `(tetrahedron, face slot)` of each row.
    pub row_faces: Vec<(usize, usize)>,
    /// `∏ c(edge classes) · ∏_Δ κ(e_Δ)·c(e_Δ)`.
    pub prefactor: S,
    pub twisted: bool,
}

impl<S: Scalar> FaceMatrix<S> {
    /// The matrix at `t = 1`.
    pub fn at_one(&self) -> Vec<Vec<S>> {
        self.rows.iter().map(|r| r.iter().map(|p| p.eval_one()).collect()).collect()
    }

    pub fn det(&self) -> LaurentPoly<S> {
        let ctx = self.prefactor.ctx();
        laurent_det(&ctx, &self.rows)
    }
}

fn local_values<S: Scalar>(tri: &Triangulation, c: &[S], t: usize) -> [S; 6] {
    std::array::from_fn(|e| c[tri.edge_class(t, EDGES[e].0, EDGES[e].1)].clone())
}

fn coefficients<S: Scalar>(tri: &Triangulation, sigma: Option<&SigmaCocycle<S>>, t: usize, ctx: &S::Ctx) -> TetCoefficients<S> {
    match sigma {
        Some(s) => TetCoefficients::of(tri, s, t),
        None => TetCoefficients::trivial(ctx),
    }
}

/// Checks the (deformed) Ptolemy relations.
pub fn check_ptolemy<S: Scalar>(tri: &Triangulation, c: &[S], sigma: Option<&SigmaCocycle<S>>) -> Result<(), OneLoopError> {
    for (t, r) in deformed_ptolemy_residuals(tri, sigma, c)?.iter().enumerate() {
        if !r.is_zero() {
            return Err(OneLoopError::NotPtolemy(t));
        }
    }
    Ok(())
}

pub fn build_face_matrix<S: Scalar>(
    tri: &Triangulation,
    c: &[S],
    choice: &EdgeChoice,
    sigma: Option<&SigmaCocycle<S>>,
    weights: Option<&FaceWeights>,
) -> Result<FaceMatrix<S>, OneLoopError> {
    choice.check(tri.num_tets())?;
    check_ptolemy(tri, c, sigma)?;
    let ctx = c[0].ctx();
    let nf = tri.num_face_classes();
    let zero = FaceWeights::zero(nf);
    let lift = lift_exponents(tri, weights.unwrap_or(&zero));
    let mut rows = vec![];
    let mut row_faces = vec![];
    let mut prefactor = c.iter().fold(S::one(&ctx), |acc, x| acc * x.clone());
    for (t, &e) in choice.0.iter().enumerate() {
        let local = local_values(tri, c, t);
        let k = coefficients(tri, sigma, t, &ctx);
        prefactor = prefactor * k.kappa[e].clone() * local[e].clone();
        let m = tet_face_matrix_deformed(&local, &k);
        for f in selected_faces(e) {
            let mut row = vec![LaurentPoly::zero(&ctx); nf];
            for (slot, x) in m[f].iter().enumerate() {
                if !x.is_zero() {
                    let col = tri.face_class(t, slot);
                    row[col] = row[col].clone() + LaurentPoly::monomial(x.clone(), lift[t][slot]);
                }
            }
            rows.push(row);
            row_faces.push((t, f));
        }
    }
    if prefactor.is_zero() {
        return Err(OneLoopError::ZeroPrefactor);
    }
    Ok(FaceMatrix { rows, row_faces, prefactor, twisted: weights.is_some() })
}

/// `δ` for the given edge choice.
pub fn one_loop_invariant<S: Scalar>(
    tri: &Triangulation,
    c: &[S],
    choice: &EdgeChoice,
    sigma: Option<&SigmaCocycle<S>>,
) -> Result<S, OneLoopError> {
    let fm = build_face_matrix(tri, c, choice, sigma, None)?;
    let ctx = fm.prefactor.ctx();
    let d = crate::scalars::det(&ctx, &fm.at_one());
    Ok(d.div(&fm.prefactor)?)
}

/// `δ(t)` before normalization.
pub fn one_loop_polynomial_raw<S: Scalar>(
    tri: &Triangulation,
    c: &[S],
    choice: &EdgeChoice,
    weights: &FaceWeights,
    sigma: Option<&SigmaCocycle<S>>,
) -> Result<LaurentPoly<S>, OneLoopError> {
    let fm = build_face_matrix(tri, c, choice, sigma, Some(weights))?;
    Ok(fm.det().scale(&fm.prefactor.inv()?))
}

/// Normalized `δ(t)`; fails with `ZeroPolynomial` when `δ(t) = 0`.
pub fn one_loop_polynomial<S: Scalar>(
    tri: &Triangulation,
    c: &[S],
    choice: &EdgeChoice,
    weights: &FaceWeights,
    sigma: Option<&SigmaCocycle<S>>,
) -> Result<LaurentPoly<S>, OneLoopError> {
    Ok(one_loop_polynomial_raw(tri, c, choice, weights, sigma)?.normalize()?)
}

/// Scales a nonzero polynomial to lowest exponent 0 and leading coefficient 1.
pub fn monic<S: Scalar>(p: &LaurentPoly<S>) -> Result<LaurentPoly<S>, ScalarError> {
    let lo = p.min_exp().ok_or(ScalarError::ZeroPolynomial)?;
    let lead = p.leading_coeff().ok_or(ScalarError::ZeroPolynomial)?.inv()?;
    Ok(p.shift(-lo).scale(&lead))
}

/// Null-space basis of a scalar face matrix.
pub fn face_matrix_kernel<S: Scalar>(m: &[Vec<S>]) -> Vec<Vec<S>> {
    match m.first().and_then(|r| r.first()) {
        Some(x) => nullspace(&x.ctx(), m),
        None => vec![],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lift<S: Scalar> {
    /// A super-Ptolemy assignment over the rank-1 Grassmann algebra with
    /// `θ = e1·v` for a kernel vector `v`.
    Lifted(SuperPtolemy<S>),
    NoLift,
}

/// Lifts `c` to a super-Ptolemy assignment with `θ ≠ 0` when the face
/// matrix is singular.
pub fn lift_to_super<S: Scalar>(
    tri: &Triangulation,
    c: &[S],
    choice: &EdgeChoice,
    sigma: Option<&SigmaCocycle<S>>,
) -> Result<Lift<S>, OneLoopError> {
    let fm = build_face_matrix(tri, c, choice, sigma, None)?;
    let kernel = face_matrix_kernel(&fm.at_one());
    let Some(v) = kernel.into_iter().next() else {
        return Ok(Lift::NoLift);
    };
    let ctx = c[0].ctx();
    let eta = Grassmann::generator(1, &ctx, 1).map_err(PtolemyError::from)?;
    let theta = v.into_iter().map(|x| eta.scale(&x)).collect();
    let cs = c.iter().map(|x| Grassmann::scalar(1, x.clone())).collect();
    let sp = SuperPtolemy::new(tri, cs, theta)?;
    let res = match sigma {
        Some(s) => sigma_residuals(tri, s, &sp)?,
        None => super_residuals(tri, &sp),
    };
    if let Some(t) = res.iter().position(|r| !r.is_zero()) {
        return Err(PtolemyError::ResidualNonzero(t).into());
    }
    Ok(Lift::Lifted(sp))
}
