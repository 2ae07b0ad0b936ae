//! Acceptance target: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use common::algebra::{decoration, SUITES};
use common::poly::{expected_det, reference_face_matrix, reduce_mod_relations, Poly};
use oneloop_core::oneloop::{
    build_face_matrix, check_ptolemy, face_matrix_kernel, lift_to_super, monic, one_loop_invariant,
    one_loop_polynomial, EdgeChoice, Lift,
};
use oneloop_core::pachner::pachner_invariance_check;
use oneloop_core::ptolemy::{check_cocycle, SigmaCocycle, SuperPtolemy};
use oneloop_core::scalars::{det, nullspace, rank, Complex, ComplexField, LaurentPoly, Quadratic, QuadraticField, Scalar};

const PRECISION_BITS: usize = 256;
const SOLVE_TOLERANCE: f64 = 1e-60;
const DEFORMED_TOL: f64 = 1e-25;
const DELTA_ZERO: f64 = 1e-20;
const EXACT_LIMIT: Duration = Duration::from_secs(1);
const DEFORMED_LIMIT: Duration = Duration::from_secs(1);
const PACHNER_LIMIT: Duration = Duration::from_secs(5);
const SUITE_LIMIT: Duration = Duration::from_secs(60);
const SUITE_CASES: u64 = 1000;
const DECORATION_CASES: u64 = 200;

/// Generic meridian values with a starting guess for the second edge class.
const GENERIC_M: [&str; 18] = [
    "2", "3", "1/2", "1", "-2", "-1/2", "3/2", "2/3", "5/4", "-3", "1/3", "5", "sqrt(-1)", "1+sqrt(-1)",
    "2-sqrt(-1)", "7/5", "-1", "3/4*sqrt(-1)",
];
const SINGULAR_M: [(&str, (f64, f64)); 2] = [("1/2+1/2*sqrt(-3)", (0.5, -0.85)), ("1/2-1/2*sqrt(-3)", (0.5, 0.85))];
const GENERIC_GUESS: (f64, f64) = (0.5, 0.9);

/// The edge choice whose face matrix is the reference 4₁ matrix.
const REFERENCE_CHOICE: &str = "03,12";

type Outcome = Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn ctx() -> ComplexField {
    ComplexField::new(PRECISION_BITS)
}

fn max_diff(a: &LaurentPoly<Complex>, b: &LaurentPoly<Complex>) -> f64 {
    let lo = a.min_exp().into_iter().chain(b.min_exp()).min().unwrap_or(0);
    let hi = a.max_exp().into_iter().chain(b.max_exp()).max().unwrap_or(0);
    (lo..=hi).map(|k| (a.coeff(k) - b.coeff(k)).magnitude()).fold(0.0, f64::max)
}

fn exact_polynomial() -> Result<LaurentPoly<Quadratic>, String> {
    let inst = common::exact("fig8.tri");
    let w = inst.file.weights.as_ref().ok_or("no weights")?;
    let c = inst.c.as_ref().ok_or("no edge values")?;
    one_loop_polynomial(inst.triangulation(), c, &EdgeChoice::uniform(2, 0), w, inst.sigma.as_ref()).map_err(err)
}

fn fig8_target(q: &QuadraticField) -> LaurentPoly<Quadratic> {
    LaurentPoly::from_terms(q, [(0, 1), (1, -4), (2, 1)].map(|(k, n)| (k, Quadratic::from_i64(q, n))))
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let p = exact_polynomial()?;
    let elapsed = t0.elapsed();
    let target = fig8_target(&common::q3());
    if p != target && p != -target.clone() {
        return Err(format!("δ(t) = {p}, expected {target}"));
    }
    within(elapsed, EXACT_LIMIT)?;
    Ok(format!("δ(t) = {p} in {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let ctx = ctx();
    let mut worst = 0f64;
    let mut slowest = Duration::ZERO;
    for m in ["2", "3", "1/2"] {
        let t0 = Instant::now();
        let d = common::solve_fig8(&ctx, m, GENERIC_GUESS, SOLVE_TOLERANCE)?;
        let p = one_loop_polynomial(&d.tri, &d.c, &EdgeChoice::uniform(2, 0), &d.weights, Some(&d.sigma)).map_err(err)?;
        let elapsed = t0.elapsed();
        let mi = d.m.inv().map_err(err)?;
        let two = Complex::from_i64(&ctx, 2);
        let raw = LaurentPoly::from_terms(
            &ctx,
            [(0, mi.clone()), (1, -(two * (d.m.clone() + mi.clone())) * mi.clone()), (2, mi)],
        );
        let target = raw.normalize().map_err(err)?;
        let diff = max_diff(&p, &target).min(max_diff(&p, &-target.clone()));
        if diff > DEFORMED_TOL {
            return Err(format!("m = {m}: δ(t) = {p}, expected {target}, difference {diff:e}"));
        }
        within(elapsed, DEFORMED_LIMIT).map_err(|e| format!("m = {m}: {e}"))?;
        worst = worst.max(diff);
        slowest = slowest.max(elapsed);
    }
    Ok(format!("max coefficient error {worst:.1e}, slowest point {slowest:.2?}"))
}

fn sweep_point(ctx: &ComplexField, m: &str, guess: (f64, f64)) -> Result<(usize, f64), String> {
    let d = common::solve_fig8(ctx, m, guess, SOLVE_TOLERANCE).map_err(|e| format!("m = {m}: {e}"))?;
    let choice = EdgeChoice::uniform(2, 0);
    let fm = build_face_matrix(&d.tri, &d.c, &choice, Some(&d.sigma), None).map_err(err)?;
    let kernel = face_matrix_kernel(&fm.at_one()).len();
    let delta = one_loop_invariant(&d.tri, &d.c, &choice, Some(&d.sigma)).map_err(err)?;
    Ok((kernel, delta.magnitude()))
}

fn criterion_3() -> Outcome {
    let ctx = ctx();
    let mut singular_seen = 0;
    let samples = GENERIC_M.iter().map(|m| (*m, GENERIC_GUESS, false)).chain(SINGULAR_M.iter().map(|(m, g)| (*m, *g, true)));
    let mut count = 0;
    for (m, guess, singular) in samples {
        let (kernel, delta) = sweep_point(&ctx, m, guess)?;
        if (kernel >= 1) != (delta < DELTA_ZERO) {
            return Err(format!("m = {m}: kernel dimension {kernel} but |δ| = {delta:e}"));
        }
        if singular != (kernel >= 1) {
            return Err(format!("m = {m}: expected {} point, kernel dimension {kernel}", if singular { "singular" } else { "generic" }));
        }
        singular_seen += singular as usize;
        count += 1;
    }

    let inst = common::exact("fig8_singular.tri");
    let tri = inst.triangulation();
    let c = inst.c.as_ref().ok_or("no edge values")?;
    let choice = EdgeChoice::parse(REFERENCE_CHOICE).map_err(err)?;
    let delta = one_loop_invariant(tri, c, &choice, inst.sigma.as_ref()).map_err(err)?;
    if !delta.is_zero() {
        return Err(format!("exact δ = {delta} at the singular point"));
    }
    let fm = build_face_matrix(tri, c, &choice, inst.sigma.as_ref(), None).map_err(err)?;
    let kernel: Vec<Vec<Quadratic>> = face_matrix_kernel(&fm.at_one())
        .into_iter()
        .map(|v| vec![v[3].clone(), v[0].clone(), v[2].clone(), v[1].clone()])
        .collect();
    let q = common::q3();
    let at = [inst.param("m").cloned().ok_or("no m")?, inst.param("l").cloned().ok_or("no l")?, c[1].clone(), c[0].clone()];
    let reference: Vec<Vec<Quadratic>> =
        reference_face_matrix().iter().map(|row| row.iter().map(|p| p.eval(&q, &at)).collect()).collect();
    let reference = nullspace(&q, &reference);
    if kernel.is_empty() || !same_span(&kernel, &reference) {
        return Err(format!("kernel {kernel:?} differs from the reference matrix kernel {reference:?}"));
    }
    let shown: Vec<String> = reference
        .iter()
        .map(|v| format!("({})", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")))
        .collect();
    Ok(format!(
        "{count} samples ({singular_seen} singular) consistent; exact δ = 0, kernel = span {}",
        shown.join(", ")
    ))
}

/// Whether two bases span the same subspace.
fn same_span(a: &[Vec<Quadratic>], b: &[Vec<Quadratic>]) -> bool {
    let stacked: Vec<Vec<Quadratic>> = a.iter().chain(b).cloned().collect();
    a.len() == b.len() && rank(&stacked) == a.len()
}

/// `(m, d, s)` with discriminant `d·s²`, so that the 4₁ variety point over
/// `m` lies in ℚ(√d).
const VARIETY_POINTS: [((i64, i64), i64, (i64, i64)); 4] =
    [((2, 1), 105, (1, 1)), ((3, 1), 5005, (1, 1)), ((1, 2), 105, (1, 16)), ((3, 2), -1463, (1, 16))];

fn criterion_4() -> Outcome {
    let d = Poly::det(&reference_face_matrix());
    let e = expected_det();
    if reduce_mod_relations(&d).is_zero() {
        return Err("determinant vanishes on the variety".into());
    }
    let sign = if reduce_mod_relations(&(d.clone() - e.clone())).is_zero() {
        "+"
    } else if reduce_mod_relations(&(d.clone() + e.clone())).is_zero() {
        "-"
    } else {
        return Err(format!("det = {d} does not reduce to ±({e})"));
    };

    let file = common::fixture("fig8.tri");
    let tri = &file.triangulation;
    let lits = file.sigma.iter().map(|(k, l)| (*k, l.expr.clone())).collect();
    let choice = EdgeChoice::parse(REFERENCE_CHOICE).map_err(err)?;
    for ((mn, md), disc, (sn, sd)) in VARIETY_POINTS {
        let q = QuadraticField::new(disc).map_err(err)?;
        let r = |n: i64, d: i64| Quadratic::from_i64(&q, n).div(&Quadratic::from_i64(&q, d)).expect("nonzero");
        let m = r(mn, md);
        let (m2, m4) = (m.clone() * m.clone(), m.clone() * m.clone() * m.clone() * m.clone());
        let root = q.sqrt_d() * r(sn, sd);
        let x = (m4.clone() + m2 - r(1, 1) + root).div(&(r(2, 1) * m4)).map_err(err)?;
        let c2 = r(1, 1);
        let l = (c2.clone() - x.clone()).div(&(x.clone() * x.clone())).map_err(err)?;
        let env = |n: &str| match n {
            "m" => Some(m.clone()),
            "l" => Some(l.clone()),
            _ => None,
        };
        let sigma = SigmaCocycle::from_literals(tri, &q, &lits, &env).map_err(err)?;
        let c = vec![c2.clone(), x.clone()];
        check_ptolemy(tri, &c, Some(&sigma)).map_err(|e| format!("m = {mn}/{md}: {e}"))?;
        let at = [m.clone(), l.clone(), x.clone(), c2.clone()];
        let want = e.eval(&q, &at);
        let reference = d.eval(&q, &at);
        let fm = build_face_matrix(tri, &c, &choice, Some(&sigma), None).map_err(err)?;
        let ours = det(&q, &fm.at_one());
        for (what, got) in [("reference matrix", reference), ("library face matrix", ours)] {
            if got != want && got != -want.clone() {
                return Err(format!("m = {mn}/{md}: {what} det {got}, expected ±{want}"));
            }
        }
    }
    Ok(format!("det F ≡ {sign}2·c1·c2³·m⁻²·(m + m⁻¹ − 1) mod relations; {} exact variety points agree", VARIETY_POINTS.len()))
}

fn criterion_5() -> Outcome {
    let inst = common::exact("fig8.tri");
    let w = inst.file.weights.as_ref().ok_or("no weights")?;
    let c = inst.c.as_ref().ok_or("no edge values")?;
    let mut seen = BTreeSet::new();
    let mut n = 0;
    for choice in EdgeChoice::all(2) {
        let p = one_loop_polynomial(inst.triangulation(), c, &choice, w, inst.sigma.as_ref()).map_err(err)?;
        seen.insert(p.to_string());
        n += 1;
    }
    if seen.len() != 1 || n != 36 {
        return Err(format!("{n} choices gave {} polynomials: {seen:?}", seen.len()));
    }
    Ok(format!("{n} choices, δ(t) = {}", seen.first().expect("one")))
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let inst = common::exact("fig8.tri");
    let tri = inst.triangulation();
    let w = inst.file.weights.as_ref().ok_or("no weights")?;
    let c = inst.c.as_ref().ok_or("no edge values")?;
    for slot in 0..4 {
        let r = pachner_invariance_check(tri, c, w, inst.sigma.as_ref(), 0, 1, slot).map_err(err)?;
        if !r.equal {
            return Err(format!("exact, face {slot}: {} became {}", r.before, r.after));
        }
    }
    let ctx = ctx();
    let d = common::solve_fig8(&ctx, "2", GENERIC_GUESS, SOLVE_TOLERANCE)?;
    let mut worst = 0f64;
    for slot in 0..4 {
        let r = pachner_invariance_check(&d.tri, &d.c, &d.weights, Some(&d.sigma), 1, 0, slot).map_err(err)?;
        let diff = max_diff(&monic(&r.before).map_err(err)?, &monic(&r.after).map_err(err)?);
        if diff > DEFORMED_TOL {
            return Err(format!("m = 2, face {slot}: {} became {} (difference {diff:e})", r.before, r.after));
        }
        worst = worst.max(diff);
    }
    let elapsed = t0.elapsed();
    within(elapsed, PACHNER_LIMIT)?;
    Ok(format!("4 exact moves equal, 4 deformed moves equal up to scalar (error {worst:.1e}) in {elapsed:.2?}"))
}

fn criterion_7() -> Outcome {
    let plain = common::exact("fig8.tri");
    let c = plain.c.as_ref().ok_or("no edge values")?;
    let sp = SuperPtolemy::from_plain(plain.triangulation(), c, 1).map_err(err)?;
    let geometric = check_cocycle(plain.triangulation(), &sp, plain.sigma.as_ref()).map_err(err)?;
    if !geometric.is_ok() {
        return Err(format!("θ = 0: {geometric:?}"));
    }

    let sing = common::exact("fig8_singular.tri");
    let c = sing.c.as_ref().ok_or("no edge values")?;
    let choice = EdgeChoice::parse(REFERENCE_CHOICE).map_err(err)?;
    let Lift::Lifted(sp) = lift_to_super(sing.triangulation(), c, &choice, sing.sigma.as_ref()).map_err(err)? else {
        return Err("no lift at the singular point".into());
    };
    if sp.theta.iter().all(|t| t.is_zero()) {
        return Err("lift has θ = 0".into());
    }
    let lifted = check_cocycle(sing.triangulation(), &sp, sing.sigma.as_ref()).map_err(err)?;
    if !lifted.is_ok() {
        return Err(format!("θ ≠ 0: {lifted:?}"));
    }
    Ok(format!(
        "{} hexagons and {} triangles close for both solutions, all matrices in OSp(2|1)",
        lifted.hexagons, lifted.triangles
    ))
}

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    for (name, check) in SUITES {
        for seed in 0..SUITE_CASES {
            check(seed).map_err(|e| format!("{name}, seed {seed}: {e}"))?;
        }
    }
    let elapsed = t0.elapsed();
    within(elapsed, SUITE_LIMIT)?;
    Ok(format!("{} suites × {SUITE_CASES} cases in {elapsed:.2?}", SUITES.len()))
}

fn criterion_9() -> Outcome {
    for seed in 0..DECORATION_CASES {
        decoration(seed).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("{DECORATION_CASES} random decorations"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("4₁ exact polynomial", criterion_1),
        ("4₁ deformed family", criterion_2),
        ("singular points and lifting", criterion_3),
        ("face matrix determinant", criterion_4),
        ("edge-choice independence", criterion_5),
        ("Pachner invariance", criterion_6),
        ("cocycle correspondence", criterion_7),
        ("algebraic suites", criterion_8),
        ("simplex-level correspondence", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}: {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
