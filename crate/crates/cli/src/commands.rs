//! One function per subcommand, each returning a record and an exit code.

use std::path::Path;

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::{json, Value};

use oneloop_core::grassmann::Grassmann;
use oneloop_core::instance::Instance;
use oneloop_core::oneloop::{
    build_face_matrix, check_ptolemy, face_matrix_kernel, lift_to_super, one_loop_invariant, one_loop_polynomial,
    EdgeChoice, Lift, OneLoopError,
};
use oneloop_core::osp21::SuperMatrix;
use oneloop_core::pachner::pachner_invariance_check;
use oneloop_core::ptolemy::{
    deformed_ptolemy_residuals, natural_cocycle, path_holonomy, verify_cocycle, SigmaCocycle, SuperPtolemy,
};
use oneloop_core::sample;
use oneloop_core::scalars::{LaurentPoly, Rational, Scalar};
use oneloop_core::triangulation::{evaluate_class_on_loop, truncate, FaceWeights, Triangulation};

use crate::backend::{prepare, Backend, Prepared};
use crate::{read_file, Cli, CliError, Command, DataArgs, PachnerAction, Record, EXIT_OK, EXIT_VALIDATION};

pub fn execute<S: Backend>(ctx: &S::Ctx, cli: &Cli) -> Result<(Record, i32), CliError> {
    let field = cli.field.to_string();
    match &cli.command {
        Command::Validate { path } => validate::<S>(ctx, path),
        Command::Oneloop { data, twist, deformed, edge_choice } => {
            oneloop::<S>(ctx, &field, data, *twist, *deformed, edge_choice)
        }
        Command::Kernel { data, edge_choice } => kernel::<S>(ctx, &field, data, edge_choice),
        Command::Cocycle { data, lift, edge_choice } => cocycle::<S>(ctx, &field, data, *lift, edge_choice),
        Command::Pachner { action: PachnerAction::Check { data, tets, face, deformed } } => {
            pachner::<S>(ctx, &field, data, tets, *face, *deformed)
        }
        Command::Solve { data } => {
            let data = DataArgs { solve: true, ..data.clone() };
            solve::<S>(ctx, &field, &data)
        }
        Command::Selfcheck { seed, cases } => Ok(selfcheck(*seed, *cases)),
    }
}

fn record(field: &str) -> Record {
    let mut r = Record::new();
    r.insert("field".into(), json!(field));
    r
}

fn strings<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(|x| json!(x.to_string())).collect())
}

fn poly_json<S: Scalar>(p: &LaurentPoly<S>) -> Value {
    Value::Object(p.terms().map(|(k, c)| (k.to_string(), json!(c.to_string()))).collect())
}

fn max_residual<S: Scalar>(p: &Prepared<S>) -> Result<f64, CliError> {
    let r = deformed_ptolemy_residuals(&p.file.triangulation, p.sigma.as_ref(), &p.c)?;
    Ok(r.iter().map(|x| x.magnitude()).fold(0.0, f64::max))
}

fn provenance<S: Scalar>(rec: &mut Record, p: &Prepared<S>) -> Result<(), CliError> {
    rec.insert("sigma".into(), json!(p.sigma.is_some()));
    rec.insert("ptolemy_residual".into(), json!(max_residual(p)?));
    if let Some(info) = p.solver {
        rec.insert("edge_values".into(), strings(&p.c));
        let params = p.params.iter().map(|(n, v)| (n.clone(), json!(v.to_string()))).collect();
        rec.insert("parameters".into(), Value::Object(params));
        rec.insert("solver".into(), json!({ "iterations": info.iterations, "residual": info.residual }));
    }
    Ok(())
}

/// The requested edge choice, or the first one with a nonzero prefactor.
fn choose<S: Scalar>(
    tri: &Triangulation,
    c: &[S],
    sigma: Option<&SigmaCocycle<S>>,
    spec: &str,
) -> Result<EdgeChoice, CliError> {
    if spec != "auto" {
        return Ok(EdgeChoice::parse(spec)?);
    }
    for choice in EdgeChoice::all(tri.num_tets()) {
        match build_face_matrix(tri, c, &choice, sigma, None) {
            Ok(_) => return Ok(choice),
            Err(OneLoopError::ZeroPrefactor) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(OneLoopError::ZeroPrefactor.into())
}

fn validate<S: Backend>(ctx: &S::Ctx, path: &Path) -> Result<(Record, i32), CliError> {
    let file = read_file(path)?;
    let t = &file.triangulation;
    let mut rec = Record::new();
    rec.insert(
        "summary".into(),
        json!(format!(
            "{} tetrahedra, {} edge classes, {} face classes, {} short-edge classes",
            t.num_tets(),
            t.num_edge_classes(),
            t.num_face_classes(),
            t.num_short_classes()
        )),
    );
    rec.insert("tetrahedra".into(), json!(t.num_tets()));
    rec.insert("edge_classes".into(), json!(t.num_edge_classes()));
    rec.insert("face_classes".into(), json!(t.num_face_classes()));
    rec.insert("short_edge_classes".into(), json!(t.num_short_classes()));
    rec.insert("cusps".into(), json!(t.num_cusps()));
    if let Some(w) = &file.weights {
        let open: Vec<usize> =
            t.edge_cycle_sums(w).iter().enumerate().filter(|(_, &s)| s != 0).map(|(e, _)| e).collect();
        if !open.is_empty() {
            return Err(CliError::Invalid(format!("face weights do not close around edge classes {open:?}")));
        }
        let mut loops = Record::new();
        for l in &file.dual_loops {
            let v = evaluate_class_on_loop(t, w, &l.crossings)
                .map_err(|e| CliError::Invalid(format!("dual loop {}: {e}", l.name)))?;
            loops.insert(l.name.clone(), json!(v));
        }
        rec.insert("weights".into(), json!(w.0));
        rec.insert("dual_loops".into(), Value::Object(loops));
    }
    let inst = Instance::<S>::new(file, ctx, &[], &[])?;
    rec.insert("sigma".into(), json!(inst.sigma.is_some()));
    if let Some(c) = &inst.c {
        check_ptolemy(inst.triangulation(), c, inst.sigma.as_ref())?;
        rec.insert("ptolemy".into(), json!("satisfied"));
    }
    Ok((rec, EXIT_OK))
}

fn oneloop<S: Backend>(
    ctx: &S::Ctx,
    field: &str,
    data: &DataArgs,
    twist: bool,
    deformed: bool,
    spec: &str,
) -> Result<(Record, i32), CliError> {
    let p = prepare::<S>(ctx, data)?;
    if deformed && p.sigma.is_none() {
        return Err(CliError::Invalid("--deformed needs σ lines in the file".into()));
    }
    let tri = &p.file.triangulation;
    check_ptolemy(tri, &p.c, p.sigma.as_ref())?;
    let choice = choose(tri, &p.c, p.sigma.as_ref(), spec)?;
    let mut rec = record(field);
    rec.insert("edge_choice".into(), json!(choice.labels()));
    if twist {
        let w = p.file.weights.as_ref().ok_or(OneLoopError::WeightsMissing)?;
        let poly = one_loop_polynomial(tri, &p.c, &choice, w, p.sigma.as_ref())?;
        rec.insert("delta_t".into(), poly_json(&poly));
    } else {
        let delta = one_loop_invariant(tri, &p.c, &choice, p.sigma.as_ref())?;
        rec.insert("delta".into(), json!(delta.to_string()));
    }
    provenance(&mut rec, &p)?;
    Ok((rec, EXIT_OK))
}

fn kernel<S: Backend>(ctx: &S::Ctx, field: &str, data: &DataArgs, spec: &str) -> Result<(Record, i32), CliError> {
    let p = prepare::<S>(ctx, data)?;
    let tri = &p.file.triangulation;
    check_ptolemy(tri, &p.c, p.sigma.as_ref())?;
    let choice = choose(tri, &p.c, p.sigma.as_ref(), spec)?;
    let fm = build_face_matrix(tri, &p.c, &choice, p.sigma.as_ref(), None)?;
    let basis = face_matrix_kernel(&fm.at_one());
    let delta = one_loop_invariant(tri, &p.c, &choice, p.sigma.as_ref())?;
    let mut rec = record(field);
    rec.insert("edge_choice".into(), json!(choice.labels()));
    rec.insert("delta".into(), json!(delta.to_string()));
    rec.insert("dimension".into(), json!(basis.len()));
    rec.insert("basis".into(), Value::Array(basis.iter().map(|v| strings(v)).collect()));
    provenance(&mut rec, &p)?;
    Ok((rec, EXIT_OK))
}

fn body_json<S: Scalar>(m: &SuperMatrix<S>) -> Value {
    Value::Array(m.body_map().iter().map(|row| strings(row)).collect())
}

fn cocycle<S: Backend>(
    ctx: &S::Ctx,
    field: &str,
    data: &DataArgs,
    lift: bool,
    spec: &str,
) -> Result<(Record, i32), CliError> {
    let p = prepare::<S>(ctx, data)?;
    let tri = &p.file.triangulation;
    let sp = if lift {
        let choice = choose(tri, &p.c, p.sigma.as_ref(), spec)?;
        match lift_to_super(tri, &p.c, &choice, p.sigma.as_ref())? {
            Lift::Lifted(sp) => sp,
            Lift::NoLift => return Err(CliError::Invalid("the face matrix is nonsingular; θ must vanish".into())),
        }
    } else if let Some(theta) = &p.theta {
        let rank = theta[0].rank();
        let c = p.c.iter().map(|x| Grassmann::scalar(rank, x.clone())).collect();
        SuperPtolemy::new(tri, c, theta.clone())?
    } else {
        SuperPtolemy::from_plain(tri, &p.c, 1)?
    };
    let complex = truncate(tri);
    let phi = natural_cocycle(tri, &complex, &sp, p.sigma.as_ref())?;
    let report = verify_cocycle(&complex, &phi);
    let mut rec = record(field);
    rec.insert("theta_zero".into(), json!(sp.theta.iter().all(|t| t.is_zero())));
    rec.insert("hexagons".into(), json!(report.hexagons));
    rec.insert("triangles".into(), json!(report.triangles));
    rec.insert("violations".into(), json!(report.violations.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>()));
    rec.insert("non_osp".into(), json!(report.non_osp.iter().map(|c| format!("{c:?}")).collect::<Vec<_>>()));
    rec.insert("ok".into(), json!(report.is_ok()));
    let mut holonomy = Record::new();
    for (name, path) in &p.file.paths {
        holonomy.insert(name.clone(), body_json(&path_holonomy(tri, &phi, path)?));
    }
    rec.insert("holonomy".into(), Value::Object(holonomy));
    let code = if report.is_ok() { EXIT_OK } else { EXIT_VALIDATION };
    Ok((rec, code))
}

fn parse_tets(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--tets '{text}' is not A,B"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn pachner<S: Backend>(
    ctx: &S::Ctx,
    field: &str,
    data: &DataArgs,
    tets: &str,
    face: usize,
    deformed: bool,
) -> Result<(Record, i32), CliError> {
    let (a, b) = parse_tets(tets)?;
    let p = prepare::<S>(ctx, data)?;
    if deformed && p.sigma.is_none() {
        return Err(CliError::Invalid("--deformed needs σ lines in the file".into()));
    }
    let tri = &p.file.triangulation;
    let weights = p.file.weights.clone().unwrap_or_else(|| FaceWeights::zero(tri.num_face_classes()));
    let r = pachner_invariance_check(tri, &p.c, &weights, p.sigma.as_ref(), a, b, face)?;
    let invariant = if deformed { r.equal_up_to_scalar } else { r.equal };
    let mut rec = record(field);
    rec.insert("tets".into(), json!([a, b]));
    rec.insert("face".into(), json!(face));
    rec.insert("new_edge_value".into(), json!(r.new_edge_value.to_string()));
    rec.insert("before".into(), poly_json(&r.before));
    rec.insert("after".into(), poly_json(&r.after));
    rec.insert("equal".into(), json!(r.equal));
    rec.insert("equal_up_to_scalar".into(), json!(r.equal_up_to_scalar));
    rec.insert("invariant".into(), json!(invariant));
    provenance(&mut rec, &p)?;
    Ok((rec, if invariant { EXIT_OK } else { EXIT_VALIDATION }))
}

fn solve<S: Backend>(ctx: &S::Ctx, field: &str, data: &DataArgs) -> Result<(Record, i32), CliError> {
    let p = prepare::<S>(ctx, data)?;
    let mut rec = record(field);
    provenance(&mut rec, &p)?;
    Ok((rec, EXIT_OK))
}

fn ber_multiplies(a: &SuperMatrix<Rational>, b: &SuperMatrix<Rational>) -> bool {
    match (a.berezinian(), b.berezinian(), (a.clone() * b.clone()).berezinian()) {
        (Ok(x), Ok(y), Ok(xy)) => xy == x * y,
        _ => false,
    }
}

fn selfcheck(seed: u64, cases: u64) -> (Record, i32) {
    let rank = 2;
    let mut failures = vec![];
    for n in 0..cases {
        let rng = &mut StdRng::seed_from_u64(seed.wrapping_add(n));
        let a: SuperMatrix<Rational> = sample::osp_element(rng, rank, &());
        let b = sample::osp_element(rng, rank, &());
        let ab = a.clone() * b.clone();
        let checks = [
            ("closure", ab.is_osp()),
            ("berezinian", ber_multiplies(&a, &b)),
            ("inverse", a.osp_inverse().is_ok_and(|inv| (inv * a.clone()).is_identity())),
        ];
        failures.extend(checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| format!("case {n}: {name}")));
    }
    let mut rec = Record::new();
    rec.insert("seed".into(), json!(seed));
    rec.insert("cases".into(), json!(cases));
    rec.insert("failures".into(), json!(failures));
    (rec, if failures.is_empty() { EXIT_OK } else { EXIT_VALIDATION })
}
