//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use oneloop_core::expr::Expr;
use oneloop_core::instance::Instance;
use oneloop_core::ptolemy::{solve_ptolemy, SigmaSystem, SolverOptions, Solution};
use oneloop_core::scalars::{Complex, ComplexField, Quadratic, QuadraticField, Scalar};
use oneloop_core::triangulation::{parse_triangulation_file, TriangulationFile};

pub fn fixture(name: &str) -> TriangulationFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    parse_triangulation_file(&path).expect("fixture parses")
}

/// The shipped 4₁ assignment over ℚ(√−3).
pub fn fig8_exact() -> Instance<Quadratic> {
    let q = QuadraticField::new(-3).expect("square-free");
    Instance::new(fixture("fig8.tri"), &q, &[], &[]).expect("instance")
}

/// Solves the 4₁ system at meridian `m` with ℓ free.
pub fn solve_fig8(ctx: &ComplexField, m: &str) -> Solution {
    let mut file = fixture("fig8.tri");
    file.c.clear();
    let ov = vec![("m".to_string(), Expr::parse(m).expect("literal"))];
    let inst: Instance<Complex> = Instance::new(file.clone(), ctx, &ov, &["l".to_string()]).expect("instance");
    let sys = SigmaSystem {
        literals: file.sigma.iter().map(|(k, l)| (*k, l.expr.clone())).collect(),
        fixed: inst.params.clone(),
        free: vec!["l".into()],
    };
    solve_ptolemy(
        &file.triangulation,
        ctx,
        Some(&sys),
        &[Complex::one(ctx), ctx.from_f64(0.5, 0.9)],
        &[ctx.from_f64(-1.0, 0.0)],
        &SolverOptions::default(),
    )
    .expect("converges")
}
