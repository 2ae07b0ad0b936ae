//! Ptolemy and super-Ptolemy assignments.
//!
//! Edge values live on edge classes, stored for the orientation from the
//! lower to the higher local vertex; `c(j, i) = −c(i, j)`.  Face values live
//! on face classes.  A σ-cocycle assigns an invertible scalar to every
//! short-edge class, oriented from the lower to the higher far vertex.
//!
//! Per tetrahedron the σ-deformed equations are
//!
//! ```text
//! c01·c23 − A·c02·c13 + B·c03·c12 − D·c01·c03·c12·c13·c23·θ0·θ2 = 0
//! E_k = Σ_m ± κ(e)·c(e)·θ_m = 0          (k = 0..3)
//! ```
//!
//! where `m` runs over the vertices other than `k` in increasing order with
//! alternating signs starting at `+`, `e` is the edge joining the two
//! remaining vertices, and `A`, `B`, `D`, `κ` are ratios of σ values.  With
//! σ ≡ 1 all of them are 1.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::grassmann::{Grassmann, GrassmannError};
use crate::osp21::{pair2, pair3, OspError, SuperMatrix, SuperVector};
use crate::scalars::{solve, Complex, ComplexField, Dual, Scalar, ScalarError};
use crate::triangulation::{
    face_vertices, truncate, Cell, PathStep, PathStepKind, RelationKind, Step, Triangulation,
    TruncatedComplex, EDGES,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PtolemyError {
    #[error("expected {expected} {what} values, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("edge class {0} has a value with zero body")]
    ZeroEdge(usize),
    #[error("value for {what} {id} has the wrong parity")]
    Parity { what: &'static str, id: usize },
    #[error("short-edge class {0} has a non-invertible σ value")]
    SigmaNotInvertible(usize),
    #[error("σ is not multiplicative on the triangle at vertex {vertex} of tetrahedron {tet}")]
    SigmaNotCocycle { tet: usize, vertex: usize },
    #[error("σ value for short-edge class {class}: {source}")]
    SigmaEval { class: usize, source: EvalError },
    #[error("residual of tetrahedron {0} does not vanish")]
    ResidualNonzero(usize),
    #[error("initial guess has a zero entry at position {0}")]
    ZeroGuess(usize),
    #[error("Jacobian is singular at iteration {0}")]
    SingularJacobian(usize),
    #[error("no convergence after {iterations} iterations (last residual {:e})", trace.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { iterations: usize, trace: Vec<f64> },
    #[error("pair {0}{1} has zero body")]
    NotGeneric(usize, usize),
    #[error("path is not composable at step {0}")]
    NotComposable(usize),
    #[error("no {kind} class {id}")]
    UnknownClass { kind: &'static str, id: usize },
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Osp(#[from] OspError),
}

/// Signed value of the local edge `(i, j)` of tetrahedron `tet`.
pub fn oriented<T: Clone + std::ops::Neg<Output = T>>(tri: &Triangulation, values: &[T], tet: usize, i: usize, j: usize) -> T {
    let v = values[tri.edge_class(tet, i, j)].clone();
    if i < j {
        v
    } else {
        -v
    }
}

// ---------------------------------------------------------------------------
// σ-cocycles

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaCocycle<S: Scalar> {
    values: Vec<S>,
    inverses: Vec<S>,
}

impl<S: Scalar> SigmaCocycle<S> {
    pub fn trivial(tri: &Triangulation, ctx: &S::Ctx) -> Self {
        let n = tri.num_short_classes();
        SigmaCocycle { values: vec![S::one(ctx); n], inverses: vec![S::one(ctx); n] }
    }

    /// Checks invertibility and triangle multiplicativity.
    pub fn new(tri: &Triangulation, values: Vec<S>) -> Result<Self, PtolemyError> {
        if values.len() != tri.num_short_classes() {
            return Err(PtolemyError::LengthMismatch {
                what: "σ",
                expected: tri.num_short_classes(),
                got: values.len(),
            });
        }
        let sigma = Self::new_unchecked(values)?;
        sigma.check_cocycle(tri)?;
        Ok(sigma)
    }

    fn new_unchecked(values: Vec<S>) -> Result<Self, PtolemyError> {
        let inverses = values
            .iter()
            .enumerate()
            .map(|(k, v)| v.inv().map_err(|_| PtolemyError::SigmaNotInvertible(k)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SigmaCocycle { values, inverses })
    }

    /// Evaluates σ literals; classes without a literal get 1.
    pub fn from_literals(
        tri: &Triangulation,
        ctx: &S::Ctx,
        literals: &BTreeMap<usize, Expr>,
        env: &dyn Fn(&str) -> Option<S>,
    ) -> Result<Self, PtolemyError> {
        Self::new(tri, Self::literal_values(tri, ctx, literals, env)?)
    }

    /// As `from_literals`, without the cocycle check.
    fn from_literals_unchecked(
        tri: &Triangulation,
        ctx: &S::Ctx,
        literals: &BTreeMap<usize, Expr>,
        env: &dyn Fn(&str) -> Option<S>,
    ) -> Result<Self, PtolemyError> {
        Self::new_unchecked(Self::literal_values(tri, ctx, literals, env)?)
    }

    fn literal_values(
        tri: &Triangulation,
        ctx: &S::Ctx,
        literals: &BTreeMap<usize, Expr>,
        env: &dyn Fn(&str) -> Option<S>,
    ) -> Result<Vec<S>, PtolemyError> {
        let mut values = vec![S::one(ctx); tri.num_short_classes()];
        for (&class, e) in literals {
            if class >= values.len() {
                return Err(PtolemyError::UnknownClass { kind: "short-edge", id: class });
            }
            values[class] = e.eval_scalar(ctx, env).map_err(|source| PtolemyError::SigmaEval { class, source })?;
        }
        Ok(values)
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, class: usize) -> &S {
        &self.values[class]
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|v| *v == S::one(&v.ctx()))
    }

    /// `σ^v_{ab}`: the value on the short edge near `v` running from the
    /// `a` side to the `b` side.
    pub fn local(&self, tri: &Triangulation, tet: usize, v: usize, a: usize, b: usize) -> S {
        let class = tri.short_class(tet, v, a, b);
        if a < b {
            self.values[class].clone()
        } else {
            self.inverses[class].clone()
        }
    }

    pub fn check_cocycle(&self, tri: &Triangulation) -> Result<(), PtolemyError> {
        for t in 0..tri.num_tets() {
            for v in 0..4 {
                let o: Vec<usize> = (0..4).filter(|&x| x != v).collect();
                let lhs = self.local(tri, t, v, o[0], o[1]) * self.local(tri, t, v, o[1], o[2]);
                if lhs != self.local(tri, t, v, o[0], o[2]) {
                    return Err(PtolemyError::SigmaNotCocycle { tet: t, vertex: v });
                }
            }
        }
        Ok(())
    }
}

/// σ-ratios entering the equations of one tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct TetCoefficients<S: Scalar> {
    /// Coefficient of each local edge (in `EDGES` order) in the odd equations.
    pub kappa: [S; 6],
    pub a: S,
    pub b: S,
    pub d: S,
}

impl<S: Scalar> TetCoefficients<S> {
    pub fn trivial(ctx: &S::Ctx) -> Self {
        let one = S::one(ctx);
        TetCoefficients { kappa: std::array::from_fn(|_| one.clone()), a: one.clone(), b: one.clone(), d: one }
    }

    pub fn of(tri: &Triangulation, sigma: &SigmaCocycle<S>, tet: usize) -> Self {
        let s = |v, a, b| sigma.local(tri, tet, v, a, b);
        let r = |x: S, y: S| x * y.inv().expect("σ values are invertible");
        let one = S::one(&s(0, 1, 2).ctx());
        let kappa = [
            r(s(0, 1, 2), s(3, 1, 2)),
            one.clone(),
            r(s(3, 0, 1), s(2, 0, 1)),
            r(s(1, 2, 3), s(0, 2, 3)),
            one,
            r(s(1, 0, 3), s(2, 0, 3)),
        ];
        let a = r(s(2, 0, 3) * s(3, 1, 2), s(1, 0, 3) * s(0, 1, 2));
        let b = r(s(3, 0, 2) * s(2, 1, 3), s(1, 0, 2) * s(0, 1, 3));
        let d = r(s(3, 0, 2), s(1, 0, 2));
        TetCoefficients { kappa, a, b, d }
    }
}

fn coefficients<S: Scalar>(tri: &Triangulation, sigma: Option<&SigmaCocycle<S>>, tet: usize, ctx: &S::Ctx) -> TetCoefficients<S> {
    match sigma {
        Some(s) => TetCoefficients::of(tri, s, tet),
        None => TetCoefficients::trivial(ctx),
    }
}

// ---------------------------------------------------------------------------
// Residuals

/// `c01·c23 − A·c02·c13 + B·c03·c12` for local edge values in `EDGES` order.
pub fn tet_ptolemy_residual<S: Scalar>(c: &[S; 6], k: &TetCoefficients<S>) -> S {
    c[0].clone() * c[5].clone() - k.a.clone() * c[1].clone() * c[4].clone() + k.b.clone() * c[2].clone() * c[3].clone()
}

/// Even and odd residuals of one tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct TetResiduals<S: Scalar> {
    pub even: Grassmann<S>,
    pub odd: [Grassmann<S>; 4],
}

impl<S: Scalar> TetResiduals<S> {
    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.iter().all(|e| e.is_zero())
    }
}

/// The odd equation `E_k` as coefficients of `θ_m`, `m = 0..3`.
pub fn tet_odd_coefficients<T: Clone + std::ops::Mul<Output = T> + std::ops::Neg<Output = T>>(
    c: &[T; 6],
    kappa: &[T; 6],
    k: usize,
    zero: T,
) -> [T; 4] {
    let mut row: [T; 4] = std::array::from_fn(|_| zero.clone());
    let others = face_vertices(k);
    for (n, &m) in others.iter().enumerate() {
        let rest: Vec<usize> = others.iter().copied().filter(|&x| x != m).collect();
        let e = crate::triangulation::edge_index(rest[0], rest[1]);
        let term = kappa[e].clone() * c[e].clone();
        row[m] = if n % 2 == 0 { term } else { -term };
    }
    row
}

/// Super residuals of one tetrahedron from its local data.
pub fn tet_super_residuals<S: Scalar>(c: &[Grassmann<S>; 6], theta: &[Grassmann<S>; 4], k: &TetCoefficients<S>) -> TetResiduals<S> {
    let rank = c[0].rank();
    let g = |s: &S| Grassmann::scalar(rank, s.clone());
    let ctx = c[0].ctx().clone();
    let even = c[0].clone() * c[5].clone() - g(&k.a) * c[1].clone() * c[4].clone() + g(&k.b) * c[2].clone() * c[3].clone()
        - g(&k.d)
            * c[0].clone()
            * c[2].clone()
            * c[3].clone()
            * c[4].clone()
            * c[5].clone()
            * theta[0].clone()
            * theta[2].clone();
    let kappa: [Grassmann<S>; 6] = std::array::from_fn(|e| g(&k.kappa[e]));
    let odd = std::array::from_fn(|f| {
        let row = tet_odd_coefficients(c, &kappa, f, Grassmann::zero(rank, &ctx));
        (0..4).fold(Grassmann::zero(rank, &ctx), |acc, m| acc + row[m].clone() * theta[m].clone())
    });
    TetResiduals { even, odd }
}

/// Plain Ptolemy residual per tetrahedron.
pub fn ptolemy_residuals<S: Scalar>(tri: &Triangulation, c: &[S]) -> Result<Vec<S>, PtolemyError> {
    deformed_ptolemy_residuals(tri, None, c)
}

/// σ-deformed Ptolemy residual per tetrahedron (θ = 0).
pub fn deformed_ptolemy_residuals<S: Scalar>(
    tri: &Triangulation,
    sigma: Option<&SigmaCocycle<S>>,
    c: &[S],
) -> Result<Vec<S>, PtolemyError> {
    check_len("edge", tri.num_edge_classes(), c.len())?;
    let ctx = c[0].ctx();
    Ok((0..tri.num_tets())
        .map(|t| {
            let local = std::array::from_fn(|e| c[tri.edge_class(t, EDGES[e].0, EDGES[e].1)].clone());
            tet_ptolemy_residual(&local, &coefficients(tri, sigma, t, &ctx))
        })
        .collect())
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), PtolemyError> {
    if expected != got || expected == 0 {
        return Err(PtolemyError::LengthMismatch { what, expected, got });
    }
    Ok(())
}

/// Edge values (even, invertible) and face values (odd) over a Grassmann algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperPtolemy<S: Scalar> {
    pub c: Vec<Grassmann<S>>,
    pub theta: Vec<Grassmann<S>>,
}

impl<S: Scalar> SuperPtolemy<S> {
    pub fn new(tri: &Triangulation, c: Vec<Grassmann<S>>, theta: Vec<Grassmann<S>>) -> Result<Self, PtolemyError> {
        check_len("edge", tri.num_edge_classes(), c.len())?;
        check_len("face", tri.num_face_classes(), theta.len())?;
        let rank = c[0].rank();
        for (k, x) in c.iter().enumerate() {
            if x.rank() != rank {
                return Err(GrassmannError::RankMismatch(rank, x.rank()).into());
            }
            if !x.is_even() {
                return Err(PtolemyError::Parity { what: "edge", id: k });
            }
            if x.body().is_zero() {
                return Err(PtolemyError::ZeroEdge(k));
            }
        }
        for (k, x) in theta.iter().enumerate() {
            if x.rank() != rank {
                return Err(GrassmannError::RankMismatch(rank, x.rank()).into());
            }
            if !x.is_odd() {
                return Err(PtolemyError::Parity { what: "face", id: k });
            }
        }
        Ok(SuperPtolemy { c, theta })
    }

    /// Scalar edge values with θ = 0.
    pub fn from_plain(tri: &Triangulation, c: &[S], rank: u8) -> Result<Self, PtolemyError> {
        check_len("edge", tri.num_edge_classes(), c.len())?;
        let ctx = c[0].ctx();
        let cs = c.iter().map(|x| Grassmann::scalar(rank, x.clone())).collect();
        Self::new(tri, cs, vec![Grassmann::zero(rank, &ctx); tri.num_face_classes()])
    }

    pub fn rank(&self) -> u8 {
        self.c[0].rank()
    }

    pub fn ctx(&self) -> S::Ctx {
        self.c[0].ctx().clone()
    }

    pub fn body(&self) -> Vec<S> {
        self.c.iter().map(|x| x.body()).collect()
    }

    fn local(&self, tri: &Triangulation, t: usize) -> ([Grassmann<S>; 6], [Grassmann<S>; 4]) {
        (
            std::array::from_fn(|e| self.c[tri.edge_class(t, EDGES[e].0, EDGES[e].1)].clone()),
            std::array::from_fn(|k| self.theta[tri.face_class(t, k)].clone()),
        )
    }
}

/// Undeformed super residuals per tetrahedron.
pub fn super_residuals<S: Scalar>(tri: &Triangulation, sp: &SuperPtolemy<S>) -> Vec<TetResiduals<S>> {
    let ctx = sp.ctx();
    (0..tri.num_tets())
        .map(|t| {
            let (c, th) = sp.local(tri, t);
            tet_super_residuals(&c, &th, &TetCoefficients::trivial(&ctx))
        })
        .collect()
}

/// σ-deformed super residuals per tetrahedron.
pub fn sigma_residuals<S: Scalar>(
    tri: &Triangulation,
    sigma: &SigmaCocycle<S>,
    sp: &SuperPtolemy<S>,
) -> Result<Vec<TetResiduals<S>>, PtolemyError> {
    sigma.check_cocycle(tri)?;
    Ok((0..tri.num_tets())
        .map(|t| {
            let (c, th) = sp.local(tri, t);
            tet_super_residuals(&c, &th, &TetCoefficients::of(tri, sigma, t))
        })
        .collect())
}

fn residuals_opt<S: Scalar>(
    tri: &Triangulation,
    sigma: Option<&SigmaCocycle<S>>,
    sp: &SuperPtolemy<S>,
) -> Result<Vec<TetResiduals<S>>, PtolemyError> {
    match sigma {
        Some(s) => sigma_residuals(tri, s, sp),
        None => Ok(super_residuals(tri, sp)),
    }
}

/// Multiplies each edge value by the weights of its two end cusps and
/// divides each face value by the weights of its three corner cusps.
pub fn scale_action<S: Scalar>(
    tri: &Triangulation,
    x: &[Grassmann<S>],
    sp: &SuperPtolemy<S>,
) -> Result<SuperPtolemy<S>, PtolemyError> {
    check_len("cusp", tri.num_cusps(), x.len())?;
    let inv = x.iter().map(|v| v.inv()).collect::<Result<Vec<_>, _>>()?;
    let c = (0..tri.num_edge_classes())
        .map(|k| {
            let (t, e) = tri.edge_members(k)[0];
            let (i, j) = EDGES[e];
            x[tri.cusp(t, i)].clone() * x[tri.cusp(t, j)].clone() * sp.c[k].clone()
        })
        .collect();
    let theta = (0..tri.num_face_classes())
        .map(|f| {
            let side = tri.face_sides(f)[0];
            face_vertices(side.slot)
                .iter()
                .fold(sp.theta[f].clone(), |acc, &v| acc * inv[tri.cusp(side.tet, v)].clone())
        })
        .collect();
    SuperPtolemy::new(tri, c, theta)
}

// ---------------------------------------------------------------------------
// Decorations

/// Edge values (in `EDGES` order) and face values (by opposite vertex) of one
/// decorated tetrahedron.
#[derive(Debug, Clone, PartialEq)]
pub struct TetDecoration<S: Scalar> {
    pub c: [Grassmann<S>; 6],
    pub theta: [Grassmann<S>; 4],
}

pub fn decoration_to_super_ptolemy<S: Scalar>(v: &[SuperVector<S>; 4]) -> Result<TetDecoration<S>, PtolemyError> {
    let c: [Grassmann<S>; 6] = std::array::from_fn(|e| pair2(&v[EDGES[e].0], &v[EDGES[e].1]));
    for (e, &(i, j)) in EDGES.iter().enumerate() {
        if c[e].body().is_zero() {
            return Err(PtolemyError::NotGeneric(i, j));
        }
    }
    let cl = |i: usize, j: usize| {
        let x = c[crate::triangulation::edge_index(i, j)].clone();
        if i < j {
            x
        } else {
            -x
        }
    };
    let theta = (0..4)
        .map(|k| {
            let [a, b, d] = face_vertices(k);
            let den = cl(a, b) * cl(b, d) * cl(d, a);
            Ok(pair3(&v[a], &v[b], &v[d]).div(&den)?)
        })
        .collect::<Result<Vec<_>, PtolemyError>>()?;
    Ok(TetDecoration { c, theta: theta.try_into().expect("four faces") })
}

// ---------------------------------------------------------------------------
// Natural cocycles

/// Super-matrices on the forward cells of the truncated complex.
#[derive(Debug, Clone)]
pub struct NaturalCocycle<S: Scalar> {
    rank: u8,
    ctx: S::Ctx,
    matrices: BTreeMap<Cell, SuperMatrix<S>>,
}

impl<S: Scalar> NaturalCocycle<S> {
    pub fn get(&self, cell: &Cell) -> Option<&SuperMatrix<S>> {
        self.matrices.get(cell)
    }

    pub fn set(&mut self, cell: Cell, m: SuperMatrix<S>) {
        self.matrices.insert(cell, m);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Cell, &SuperMatrix<S>)> {
        self.matrices.iter()
    }

    pub fn identity(&self) -> SuperMatrix<S> {
        SuperMatrix::identity(self.rank, &self.ctx)
    }

    /// The matrix of a traversed cell; backward steps use the OSp inverse
    /// formula.
    pub fn step(&self, step: &Step) -> SuperMatrix<S> {
        let m = &self.matrices[&step.cell];
        if step.forward {
            m.clone()
        } else {
            m.osp_inverse_unchecked()
        }
    }

    /// Left-to-right product along a word.
    pub fn product(&self, word: &[Step]) -> SuperMatrix<S> {
        word.iter().fold(self.identity(), |acc, s| acc * self.step(s))
    }
}

fn cyclic(i: usize, j: usize, k: usize) -> bool {
    (i < j && j < k) || (j < k && k < i) || (k < i && i < j)
}

fn short_matrix<S: Scalar>(
    tri: &Triangulation,
    sp: &SuperPtolemy<S>,
    sigma: Option<&SigmaCocycle<S>>,
    t: usize,
    v: usize,
    a: usize,
    b: usize,
) -> Result<SuperMatrix<S>, PtolemyError> {
    if !cyclic(a, v, b) {
        return Ok(short_matrix(tri, sp, sigma, t, v, b, a)?.osp_inverse_unchecked());
    }
    let (i, j, k) = (a, v, b);
    let rank = sp.rank();
    let ctx = sp.ctx();
    let s = |v, x, y| match sigma {
        Some(sg) => Grassmann::scalar(rank, sg.local(tri, t, v, x, y)),
        None => Grassmann::one(rank, &ctx),
    };
    let c = |x, y| oriented(tri, &sp.c, t, x, y);
    let th = sp.theta[tri.face_class(t, 6 - i - j - k)].clone();
    let s_jik = s(j, i, k);
    let s_ikj = s(i, k, j);
    let s_kji = s(k, j, i);
    let (o, z) = (Grassmann::one(rank, &ctx), Grassmann::zero(rank, &ctx));
    let b01 = -(s_ikj.div(&s_kji)? * c(k, i).div(&(c(i, j) * c(j, k)))?);
    let b02 = (c(k, i) * th.clone()).div(&s_kji)?;
    let b21 = -(c(k, i) * th).div(&(s_jik.clone() * s_kji))?;
    Ok(SuperMatrix::new([[s_jik.clone(), b01, b02], [z.clone(), s_jik.inv()?, z.clone()], [z.clone(), b21, o]])?)
}

/// The natural cocycle of a (σ-deformed) super-Ptolemy assignment.
pub fn natural_cocycle<S: Scalar>(
    tri: &Triangulation,
    complex: &TruncatedComplex,
    sp: &SuperPtolemy<S>,
    sigma: Option<&SigmaCocycle<S>>,
) -> Result<NaturalCocycle<S>, PtolemyError> {
    for (t, r) in residuals_opt(tri, sigma, sp)?.iter().enumerate() {
        if !r.is_zero() {
            return Err(PtolemyError::ResidualNonzero(t));
        }
    }
    let mut matrices = BTreeMap::new();
    for cell in complex.short_edges.iter().chain(&complex.long_edges) {
        let m = match *cell {
            Cell::Short { tet, v, j, k } => short_matrix(tri, sp, sigma, tet, v, j, k)?,
            Cell::Long { tet, i, j } => SuperMatrix::counter_diagonal(oriented(tri, &sp.c, tet, i, j))?,
        };
        matrices.insert(*cell, m);
    }
    Ok(NaturalCocycle { rank: sp.rank(), ctx: sp.ctx(), matrices })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleReport {
    pub hexagons: usize,
    pub triangles: usize,
    /// Relations whose boundary product is not the identity.
    pub violations: Vec<RelationKind>,
    /// Cells whose matrix is not in OSp(2|1).
    pub non_osp: Vec<Cell>,
}

impl CocycleReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty() && self.non_osp.is_empty()
    }
}

pub fn verify_cocycle<S: Scalar>(complex: &TruncatedComplex, phi: &NaturalCocycle<S>) -> CocycleReport {
    let non_osp = phi.iter().filter(|(_, m)| !m.is_osp()).map(|(c, _)| *c).collect();
    let violations = complex
        .hexagons
        .iter()
        .chain(&complex.triangles)
        .filter(|r| !phi.product(&r.word).is_identity())
        .map(|r| r.kind)
        .collect();
    CocycleReport { hexagons: complex.hexagons.len(), triangles: complex.triangles.len(), violations, non_osp }
}

/// Ordered product along a path of short-edge and edge classes.  Each step
/// uses the member of its class that starts where the previous step ended.
pub fn path_holonomy<S: Scalar>(
    tri: &Triangulation,
    phi: &NaturalCocycle<S>,
    path: &[PathStep],
) -> Result<SuperMatrix<S>, PtolemyError> {
    let mut acc = phi.identity();
    let mut here: Option<usize> = None;
    for (n, ps) in path.iter().enumerate() {
        let candidates: Vec<Cell> = match ps.kind {
            PathStepKind::Short => {
                if ps.id >= tri.num_short_classes() {
                    return Err(PtolemyError::UnknownClass { kind: "short-edge", id: ps.id });
                }
                tri.short_members(ps.id).into_iter().map(|(tet, v, j, k)| Cell::Short { tet, v, j, k }).collect()
            }
            PathStepKind::Long => {
                if ps.id >= tri.num_edge_classes() {
                    return Err(PtolemyError::UnknownClass { kind: "edge", id: ps.id });
                }
                tri.edge_members(ps.id).into_iter().map(|(tet, e)| Cell::Long { tet, i: EDGES[e].0, j: EDGES[e].1 }).collect()
            }
        };
        let step = candidates
            .into_iter()
            .map(|cell| Step { cell, forward: ps.forward })
            .find(|s| here.is_none_or(|h| tri.step_endpoints(s).0 == h))
            .ok_or(PtolemyError::NotComposable(n))?;
        here = Some(tri.step_endpoints(&step).1);
        acc = acc * phi.step(&step);
    }
    Ok(acc)
}

/// Convenience: truncates, builds the cocycle and verifies it.
pub fn check_cocycle<S: Scalar>(
    tri: &Triangulation,
    sp: &SuperPtolemy<S>,
    sigma: Option<&SigmaCocycle<S>>,
) -> Result<CocycleReport, PtolemyError> {
    let complex = truncate(tri);
    let phi = natural_cocycle(tri, &complex, sp, sigma)?;
    Ok(verify_cocycle(&complex, &phi))
}

// ---------------------------------------------------------------------------
// Numeric solver

/// σ given by literals in named parameters, some fixed and some solved for.
#[derive(Debug, Clone)]
pub struct SigmaSystem {
    pub literals: BTreeMap<usize, Expr>,
    pub fixed: Vec<(String, Complex)>,
    pub free: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Edge class whose value is fixed to 1.
    pub pin: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { pin: 0, tolerance: 1e-30, max_iterations: 200 }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub c: Vec<Complex>,
    pub free: Vec<(String, Complex)>,
    pub residual: f64,
    pub iterations: usize,
}

type D = Dual<Complex>;

/// Extra Newton steps taken after the tolerance is first met.
const POLISH_STEPS: usize = 2;

fn eval_system(
    tri: &Triangulation,
    ctx: &ComplexField,
    system: Option<&SigmaSystem>,
    opts: &SolverOptions,
    x: &[D],
) -> Result<Vec<D>, PtolemyError> {
    let ne = tri.num_edge_classes();
    let mut c = Vec::with_capacity(ne);
    let mut it = x.iter();
    for k in 0..ne {
        if k == opts.pin {
            c.push(D::one(ctx));
        } else {
            c.push(it.next().expect("unknown per free edge").clone());
        }
    }
    let sigma = match system {
        Some(sys) => {
            let free: Vec<(&str, D)> = sys.free.iter().map(|n| n.as_str()).zip(it.cloned()).collect();
            let env = |name: &str| {
                free.iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, v)| v.clone())
                    .or_else(|| sys.fixed.iter().find(|(n, _)| n == name).map(|(_, v)| D::constant(v.clone())))
            };
            Some(SigmaCocycle::from_literals_unchecked(tri, ctx, &sys.literals, &env)?)
        }
        None => None,
    };
    deformed_ptolemy_residuals(tri, sigma.as_ref(), &c)
}

/// Damped Newton iteration on the σ-deformed Ptolemy equations with one edge
/// value pinned to 1.  `guess` gives all edge values (the pinned one is
/// ignored); `free_guess` gives the free parameters.
///
/// Square systems take the Newton step directly and fall back to
/// Levenberg-Marquardt normal equations, damped by the residual, when the
/// Jacobian is singular.  Each step tries lengths 1 and 2 (the latter restores
/// fast convergence at double roots) before backtracking.  Linear algebra runs
/// with a zero tolerance near the working precision, so the iteration can
/// continue below the field's own tolerance.
pub fn solve_ptolemy(
    tri: &Triangulation,
    ctx: &ComplexField,
    system: Option<&SigmaSystem>,
    guess: &[Complex],
    free_guess: &[Complex],
    opts: &SolverOptions,
) -> Result<Solution, PtolemyError> {
    check_len("edge", tri.num_edge_classes(), guess.len())?;
    let nfree = system.map_or(0, |s| s.free.len());
    if free_guess.len() != nfree {
        return Err(PtolemyError::LengthMismatch { what: "free parameter", expected: nfree, got: free_guess.len() });
    }
    for (k, g) in guess.iter().enumerate() {
        if k != opts.pin && g.is_zero() {
            return Err(PtolemyError::ZeroGuess(k));
        }
    }
    if let Some(sys) = system {
        let env = |name: &str| {
            sys.free.iter().position(|n| n == name).map(|i| free_guess[i].clone())
                .or_else(|| sys.fixed.iter().find(|(n, _)| n == name).map(|(_, v)| v.clone()))
        };
        SigmaCocycle::from_literals(tri, ctx, &sys.literals, &env)?;
    }
    let work = ComplexField::with_tolerance(ctx.bits(), 2f64.powi(20 - ctx.bits() as i32));
    let system = system.map(|s| SigmaSystem {
        literals: s.literals.clone(),
        fixed: s.fixed.iter().map(|(n, v)| (n.clone(), v.with_field(&work))).collect(),
        free: s.free.clone(),
    });
    let system = system.as_ref();
    let mut x: Vec<Complex> = guess
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != opts.pin)
        .map(|(_, g)| g.with_field(&work))
        .chain(free_guess.iter().map(|g| g.with_field(&work)))
        .collect();
    let residual_norm = |x: &[Complex]| -> Option<f64> {
        let trial: Vec<D> = x.iter().cloned().map(D::constant).collect();
        let r = eval_system(tri, &work, system, opts, &trial).ok()?;
        Some(r.iter().map(|d| d.v.magnitude()).fold(0.0, f64::max))
    };
    let mut trace = vec![];
    let mut polish = 0;
    for iter in 0..opts.max_iterations {
        let consts: Vec<D> = x.iter().cloned().map(D::constant).collect();
        let r: Vec<Complex> = eval_system(tri, &work, system, opts, &consts)?.into_iter().map(|d| d.v).collect();
        let norm = r.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
        trace.push(norm);
        if norm < opts.tolerance {
            polish += 1;
        }
        let finish = |x: &[Complex]| {
            let mut c = vec![];
            let mut k = 0;
            for e in 0..tri.num_edge_classes() {
                if e == opts.pin {
                    c.push(Complex::one(ctx));
                } else {
                    c.push(x[k].with_field(ctx));
                    k += 1;
                }
            }
            let free = system.map_or(vec![], |s| s.free.iter().cloned().zip(x[k..].iter().map(|v| v.with_field(ctx))).collect());
            Solution { c, free, residual: norm, iterations: iter }
        };
        if polish > POLISH_STEPS || (polish > 0 && norm == 0.0) {
            return Ok(finish(&x));
        }
        let n = x.len();
        let mut jac = vec![vec![Complex::zero(&work); n]; r.len()];
        for u in 0..n {
            let mut dx = consts.clone();
            dx[u] = D::variable(x[u].clone());
            let col = eval_system(tri, &work, system, opts, &dx)?;
            for (row, d) in col.into_iter().enumerate() {
                jac[row][u] = d.d;
            }
        }
        let neg_r: Vec<Complex> = r.iter().map(|v| -v.clone()).collect();
        let direct = if r.len() == n { solve(&work, &jac, &neg_r) } else { None };
        let step = match direct {
            Some(s) => Some(s),
            None => {
                let damping = work.from_f64(norm.min(norm * norm), 0.0);
                let normal: Vec<Vec<Complex>> = (0..n)
                    .map(|a| {
                        (0..n)
                            .map(|b| {
                                let jj = (0..r.len())
                                    .fold(Complex::zero(&work), |acc, i| acc + jac[i][a].conj() * jac[i][b].clone());
                                if a == b {
                                    jj + damping.clone()
                                } else {
                                    jj
                                }
                            })
                            .collect()
                    })
                    .collect();
                let rhs: Vec<Complex> = (0..n)
                    .map(|a| (0..r.len()).fold(Complex::zero(&work), |acc, i| acc + jac[i][a].conj() * neg_r[i].clone()))
                    .collect();
                solve(&work, &normal, &rhs)
            }
        };
        let Some(step) = step else {
            if polish > 0 {
                return Ok(finish(&x));
            }
            return Err(PtolemyError::SingularJacobian(iter));
        };
        let advance = |alpha: f64| -> Vec<Complex> {
            let a = work.from_f64(alpha, 0.0);
            x.iter().zip(&step).map(|(xi, si)| xi.clone() + a.clone() * si.clone()).collect()
        };
        let mut best: Option<(f64, Vec<Complex>)> = None;
        for alpha in [1.0, 2.0] {
            let cand = advance(alpha);
            if let Some(v) = residual_norm(&cand) {
                if v < norm && best.as_ref().map_or(true, |(b, _)| v < *b) {
                    best = Some((v, cand));
                }
            }
        }
        let mut alpha = 0.5;
        for _ in 0..40 {
            if best.is_some() {
                break;
            }
            let cand = advance(alpha);
            if residual_norm(&cand).is_some_and(|v| v < norm) {
                best = Some((0.0, cand));
            }
            alpha *= 0.5;
        }
        x = match best {
            Some((_, next)) => next,
            None => advance(alpha),
        };
    }
    Err(PtolemyError::NoConvergence { iterations: opts.max_iterations, trace })
}
