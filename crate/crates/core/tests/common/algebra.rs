//! Seeded algebraic checks shared by the property suites and the acceptance
//! target.  Each returns a description of the first failure.

use oneloop_core::grassmann::Grassmann;
use std::sync::OnceLock;

use oneloop_core::instance::Instance;
use oneloop_core::oneloop::{lift_to_super, one_loop_polynomial, EdgeChoice, Lift};
use oneloop_core::osp21::{pair2, pair3, SuperMatrix, SuperVector};
use oneloop_core::ptolemy::{
    decoration_to_super_ptolemy, scale_action, sigma_residuals, tet_super_residuals, PtolemyError, SuperPtolemy,
    TetCoefficients,
};
use oneloop_core::sample;
use oneloop_core::scalars::{LaurentPoly, Quadratic, Rational, Scalar};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type Check = fn(u64) -> Result<(), String>;

pub const SUITES: [(&str, Check); 7] = [
    ("grassmann axioms", grassmann_axioms),
    ("osp closure", osp_closure),
    ("berezinian multiplicativity", ber_multiplicative),
    ("osp inverse formula", osp_inverse_formula),
    ("pairings", pairings),
    ("odd equation dependency", odd_dependency),
    ("scaling action", scaling_action),
];

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

pub fn grassmann_axioms(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let rank = r.gen_range(1..=4);
    if r.gen_bool(0.5) {
        grassmann_axioms_in::<Rational>(r, rank, &())
    } else {
        grassmann_axioms_in::<Quadratic>(r, rank, &super::q3())
    }
}

fn grassmann_axioms_in<S: Scalar>(r: &mut StdRng, rank: u8, ctx: &S::Ctx) -> Result<(), String> {
    let a = sample::grassmann::<S, _>(r, rank, ctx);
    let b = sample::grassmann::<S, _>(r, rank, ctx);
    let c = sample::grassmann::<S, _>(r, rank, ctx);
    let one = Grassmann::one(rank, ctx);
    ensure((a.clone() * b.clone()) * c.clone() == a.clone() * (b.clone() * c.clone()), || format!("associativity: {a}, {b}, {c}"))?;
    ensure(a.clone() * (b.clone() + c.clone()) == a.clone() * b.clone() + a.clone() * c.clone(), || "left distributivity".into())?;
    ensure((a.clone() + b.clone()) * c.clone() == a.clone() * c.clone() + b.clone() * c.clone(), || "right distributivity".into())?;
    ensure(a.clone() + b.clone() == b.clone() + a.clone(), || "additive commutativity".into())?;
    ensure(a.clone() * one.clone() == a && one * a.clone() == a, || "unit".into())?;
    ensure((a.clone() - a.clone()).is_zero(), || "additive inverse".into())?;
    ensure((a.clone() * b.clone()).body() == a.body() * b.body(), || "body is multiplicative".into())?;
    let (o1, o2) = (sample::odd::<S, _>(r, rank, ctx), sample::odd::<S, _>(r, rank, ctx));
    let e = sample::even::<S, _>(r, rank, ctx);
    let oo = o1.clone() * o2.clone();
    ensure(oo.is_zero() || oo.is_even(), || "odd·odd is even".into())?;
    let oe = o1.clone() * e.clone();
    ensure(oe.is_zero() || oe.is_odd(), || "odd·even is odd".into())?;
    ensure(o1.clone() * o2.clone() == -(o2.clone() * o1.clone()), || "odd elements anticommute".into())?;
    ensure(e.clone() * a.clone() == a.clone() * e.clone(), || "even elements are central".into())?;
    let u = sample::even_unit::<S, _>(r, rank, ctx);
    let ui = u.inv().map_err(|e| e.to_string())?;
    ensure(u.clone() * ui.clone() == Grassmann::one(rank, ctx), || format!("inverse of {u}"))?;
    ensure(ui.inv().map_err(|e| e.to_string())? == u, || "double inverse".into())?;
    let nil = a.clone() - Grassmann::scalar(rank, a.body());
    ensure(nil.inv().is_err(), || "element with zero body must not be invertible".into())
}

pub fn osp_closure(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let rank = r.gen_range(1..=3);
    let g = sample::osp_element::<Rational, _>(r, rank, &());
    let h = sample::osp_element::<Rational, _>(r, rank, &());
    let gh = g.clone() * h.clone();
    gh.osp_check().map_err(|v| format!("product leaves OSp: {v}"))?;
    let prod = |x: [[Rational; 2]; 2], y: [[Rational; 2]; 2]| -> [[Rational; 2]; 2] {
        std::array::from_fn(|i| std::array::from_fn(|j| x[i][0].clone() * y[0][j].clone() + x[i][1].clone() * y[1][j].clone()))
    };
    ensure(gh.body_map() == prod(g.body_map(), h.body_map()), || "body map is not a homomorphism".into())?;
    let ber = gh.berezinian().map_err(|e| e.to_string())?;
    ensure(ber == Grassmann::one(rank, &()), || format!("Ber = {ber} on an OSp element"))?;
    let e = gh.entry(2, 2).clone();
    let gd = gh.entry(2, 0).clone() * gh.entry(2, 1).clone();
    let one = Grassmann::one(rank, &());
    ensure(e.clone() == one.clone() - gd.clone() && e.inv().unwrap() == one + gd, || "e^{±1} = 1 ∓ γδ".into())
}

pub fn ber_multiplicative(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let rank = r.gen_range(1..=3);
    let g = sample::even_matrix::<Rational, _>(r, rank, &());
    let h = sample::even_matrix::<Rational, _>(r, rank, &());
    let bg = g.berezinian().map_err(|e| e.to_string())?;
    let bh = h.berezinian().map_err(|e| e.to_string())?;
    let bgh = (g * h).berezinian().map_err(|e| e.to_string())?;
    ensure(bgh == bg.clone() * bh.clone(), || format!("Ber(gh) = {bgh} but Ber(g)Ber(h) = {}", bg * bh))
}

pub fn osp_inverse_formula(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let rank = r.gen_range(1..=3);
    let g = sample::osp_element::<Rational, _>(r, rank, &());
    let gi = g.osp_inverse().map_err(|e| e.to_string())?;
    let id = SuperMatrix::identity(rank, &());
    ensure(g.clone() * gi.clone() == id && gi.clone() * g.clone() == id, || format!("inverse fails for {g}"))?;
    ensure(gi.is_osp(), || "inverse leaves OSp".into())?;
    ensure(g.super_transpose().super_transpose().super_transpose().super_transpose() == g, || "st⁴ ≠ id".into())
}

pub fn pairings(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let rank = r.gen_range(1..=3);
    let v = |r: &mut StdRng| sample::super_vector::<Rational, _>(r, rank, &());
    let (u, w, x) = (v(r), v(r), v(r));
    ensure(pair2(&u, &w) == -pair2(&w, &u), || "pair2 is not skew".into())?;
    ensure(pair2(&u, &u).is_zero(), || "pair2(u, u) ≠ 0".into())?;
    let p = pair3(&u, &w, &x);
    ensure(pair3(&w, &u, &x) == -p.clone() && pair3(&u, &x, &w) == -p.clone() && pair3(&x, &w, &u) == -p.clone(), || {
        "pair3 is not alternating".into()
    })?;
    ensure(pair3(&w, &x, &u) == p, || "pair3 is not cyclic".into())?;
    ensure(pair3(&u, &u, &w).is_zero() && pair3(&u, &w, &w).is_zero(), || "pair3 with a repeated argument".into())?;
    let g = sample::osp_element::<Rational, _>(r, rank, &());
    let act = |y: &SuperVector<Rational>| g.act(y).map_err(|e| e.to_string());
    let (gu, gw, gx) = (act(&u)?, act(&w)?, act(&x)?);
    ensure(pair2(&gu, &gw) == pair2(&u, &w), || "pair2 is not OSp-invariant".into())?;
    ensure(pair3(&gu, &gw, &gx) == p, || "pair3 is not OSp-invariant".into())
}

/// A random Ptolemy tetrahedron in rank `rank`, from a decoration.
fn random_tetrahedron(r: &mut StdRng, rank: u8) -> ([Grassmann<Rational>; 6], [Grassmann<Rational>; 4]) {
    loop {
        let v: [SuperVector<Rational>; 4] = std::array::from_fn(|_| sample::super_vector(r, rank, &()));
        match decoration_to_super_ptolemy(&v) {
            Ok(d) => return (d.c, d.theta),
            Err(PtolemyError::NotGeneric(..)) => continue,
            Err(e) => panic!("{e}"),
        }
    }
}

/// For Ptolemy edge values and arbitrary odd θ, `c01·E1 − c02·E2 + c03·E3`
/// vanishes identically; θ solved from two odd equations satisfies all four.
pub fn odd_dependency(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let rank = 3;
    let (c, _) = random_tetrahedron(r, 1);
    let c: [Grassmann<Rational>; 6] = c.map(|x| Grassmann::scalar(rank, x.body()));
    let theta: [Grassmann<Rational>; 4] = std::array::from_fn(|_| sample::odd(r, rank, &()));
    let k = TetCoefficients::trivial(&());
    let res = tet_super_residuals(&c, &theta, &k);
    let comb = c[0].clone() * res.odd[1].clone() - c[1].clone() * res.odd[2].clone() + c[2].clone() * res.odd[3].clone();
    ensure(comb.is_zero(), || format!("dependency combination = {comb}"))?;
    // θ0, θ1 free; θ2, θ3 from E0 and E1
    let mut th = theta.clone();
    let (c12, c13, c23) = (c[3].clone(), c[4].clone(), c[5].clone());
    let (c02, c03) = (c[1].clone(), c[2].clone());
    // E0: c23θ1 − c13θ2 + c12θ3 = 0, E1: c23θ0 − c03θ2 + c02θ3 = 0
    let det = c12.clone() * c03.clone() - c13.clone() * c02.clone();
    if det.body().is_zero() {
        return Ok(());
    }
    let di = det.inv().unwrap();
    let r0 = -(c23.clone() * th[1].clone());
    let r1 = -(c23 * th[0].clone());
    th[2] = (r0.clone() * c02 - r1.clone() * c12) * di.clone();
    th[3] = (c03 * r0 - c13 * r1) * di;
    let res = tet_super_residuals(&c, &th, &k);
    ensure(res.odd[0].is_zero() && res.odd[1].is_zero(), || "constructed θ fails its own equations".into())?;
    ensure(res.odd[2].is_zero() && res.odd[3].is_zero(), || "two odd equations do not imply the others".into())
}

/// Scaling by a random invertible even element preserves the residuals, and
/// the uniform scaling `k` acts as `(k²c, k⁻³θ)`.
struct ScalingData {
    singular: Instance<Quadratic>,
    lift: SuperPtolemy<Quadratic>,
    plain: Instance<Quadratic>,
    delta_t: LaurentPoly<Quadratic>,
}

fn scaling_data() -> &'static ScalingData {
    static DATA: OnceLock<ScalingData> = OnceLock::new();
    DATA.get_or_init(|| {
        let singular = super::exact("fig8_singular.tri");
        let c = singular.c.clone().unwrap();
        let lift = lift_to_super(singular.triangulation(), &c, &EdgeChoice::uniform(2, 0), singular.sigma.as_ref()).unwrap();
        let Lift::Lifted(lift) = lift else { panic!("singular fixture does not lift") };
        let plain = super::exact("fig8.tri");
        let w = plain.file.weights.clone().unwrap();
        let delta_t = one_loop_polynomial(
            plain.triangulation(),
            plain.c.as_ref().unwrap(),
            &EdgeChoice::uniform(2, 0),
            &w,
            plain.sigma.as_ref(),
        )
        .unwrap();
        ScalingData { singular, lift, plain, delta_t }
    })
}

pub fn scaling_action(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let data = scaling_data();
    let tri = data.singular.triangulation();
    let sigma = data.singular.sigma.as_ref().unwrap();
    let sp = &data.lift;
    let q = super::q3();
    let rank = 2;
    let sp2 = SuperPtolemy::new(
        tri,
        sp.c.iter().map(|x| x.with_rank(rank).unwrap()).collect(),
        sp.theta.iter().map(|x| x.with_rank(rank).unwrap()).collect(),
    )
    .map_err(|e| e.to_string())?;
    let x = vec![sample::even_unit::<Quadratic, _>(r, rank, &q)];
    let scaled = scale_action(tri, &x, &sp2).map_err(|e| e.to_string())?;
    let res = sigma_residuals(tri, sigma, &scaled).map_err(|e| e.to_string())?;
    ensure(res.iter().all(|t| t.is_zero()), || format!("residuals of x·(c, θ) for x = {}", x[0]))?;
    let k: Quadratic = sample::nonzero_scalar(r, &q);
    let kk = Grassmann::scalar(rank, k.clone());
    let uniform = scale_action(tri, &[kk.clone()], &sp2).map_err(|e| e.to_string())?;
    let k2 = kk.clone() * kk.clone();
    let k3i = (k2.clone() * kk).inv().unwrap();
    ensure(uniform.c.iter().zip(&sp2.c).all(|(a, b)| *a == k2.clone() * b.clone()), || "c ↦ k²c".into())?;
    ensure(uniform.theta.iter().zip(&sp2.theta).all(|(a, b)| *a == k3i.clone() * b.clone()), || "θ ↦ k⁻³θ".into())?;
    let plain = &data.plain;
    let w = plain.file.weights.clone().unwrap();
    let scaled_c: Vec<Quadratic> = plain.c.as_ref().unwrap().iter().map(|x| x.clone() * k.clone() * k.clone()).collect();
    let choice = EdgeChoice::uniform(2, 0);
    let after = one_loop_polynomial(plain.triangulation(), &scaled_c, &choice, &w, plain.sigma.as_ref()).map_err(|e| e.to_string())?;
    ensure(data.delta_t == after, || format!("δ(t) changes under scaling: {} vs {after}", data.delta_t))
}

/// `decoration_to_super_ptolemy` on random generic rank-2 vectors satisfies
/// the super-Ptolemy equations of its tetrahedron.
pub fn decoration(seed: u64) -> Result<(), String> {
    let r = &mut rng(seed);
    let rank = 2;
    let (c, theta) = random_tetrahedron(r, rank);
    let res = tet_super_residuals(&c, &theta, &TetCoefficients::trivial(&()));
    ensure(res.is_zero(), || format!("residuals {:?}", res))
}
