//! Shared fixture loading and test-only oracles.
#![allow(dead_code)]

use std::path::PathBuf;

use oneloop_core::expr::Expr;
use oneloop_core::instance::Instance;
use oneloop_core::ptolemy::{solve_ptolemy, SigmaCocycle, SigmaSystem, SolverOptions};
use oneloop_core::scalars::{Complex, ComplexField, Quadratic, QuadraticField, Scalar};
use oneloop_core::triangulation::{parse_triangulation_file, FaceWeights, Triangulation, TriangulationFile};

pub mod algebra;
pub mod poly;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> TriangulationFile {
    parse_triangulation_file(&fixture_path(name)).expect("fixture parses")
}

pub fn q3() -> QuadraticField {
    QuadraticField::new(-3).unwrap()
}

/// The shipped assignment of a fixture over ℚ(√−3).
pub fn exact(name: &str) -> Instance<Quadratic> {
    Instance::new(fixture(name), &q3(), &[], &[]).expect("instance")
}

pub struct Deformed {
    pub tri: Triangulation,
    pub weights: FaceWeights,
    pub m: Complex,
    pub l: Complex,
    pub c: Vec<Complex>,
    pub sigma: SigmaCocycle<Complex>,
    pub residual: f64,
    pub iterations: usize,
}

/// Solves the deformed 4₁ system at meridian value `m` (a literal) with ℓ
/// free, starting from `guess` for the second edge class and ℓ = −1, until
/// the residual drops below `tolerance`.
pub fn solve_fig8(ctx: &ComplexField, m: &str, guess: (f64, f64), tolerance: f64) -> Result<Deformed, String> {
    let mut file = fixture("fig8.tri");
    file.c.clear();
    let ov = vec![("m".to_string(), Expr::parse(m).map_err(|e| e.to_string())?)];
    let inst: Instance<Complex> = Instance::new(file.clone(), ctx, &ov, &["l".to_string()]).map_err(|e| e.to_string())?;
    let sys = SigmaSystem {
        literals: file.sigma.iter().map(|(k, l)| (*k, l.expr.clone())).collect(),
        fixed: inst.params.clone(),
        free: vec!["l".into()],
    };
    let tri = file.triangulation.clone();
    let sol = solve_ptolemy(
        &tri,
        ctx,
        Some(&sys),
        &[Complex::one(ctx), ctx.from_f64(guess.0, guess.1)],
        &[ctx.from_f64(-1.0, 0.0)],
        &SolverOptions { tolerance, ..SolverOptions::default() },
    )
    .map_err(|e| e.to_string())?;
    let l = sol.free[0].1.clone();
    let env = |n: &str| if n == "l" { Some(l.clone()) } else { inst.param(n).cloned() };
    let sigma = SigmaCocycle::from_literals(&tri, ctx, &sys.literals, &env).map_err(|e| e.to_string())?;
    Ok(Deformed {
        weights: file.weights.clone().expect("fixture weights"),
        m: inst.param("m").cloned().expect("m"),
        l,
        c: sol.c,
        sigma,
        residual: sol.residual,
        iterations: sol.iterations,
        tri,
    })
}
