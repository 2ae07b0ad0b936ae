//! Turning a file plus flags into edge values and σ in a chosen field.

use oneloop_core::expr::Expr;
use oneloop_core::grassmann::Grassmann;
use oneloop_core::instance::{parse_override, Instance};
use oneloop_core::ptolemy::{solve_ptolemy, SigmaCocycle, SigmaSystem, SolverOptions};
use oneloop_core::scalars::{Complex, Quadratic, Rational, Scalar};
use oneloop_core::triangulation::TriangulationFile;

use crate::{read_file, CliError, DataArgs};

/// Data ready for the invariants.
#[derive(Debug, Clone)]
pub struct Prepared<S: Scalar> {
    pub file: TriangulationFile,
    /// All parameter values, solved ones last.
    pub params: Vec<(String, S)>,
    pub c: Vec<S>,
    pub sigma: Option<SigmaCocycle<S>>,
    pub theta: Option<Vec<Grassmann<S>>>,
    pub solver: Option<SolverInfo>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverInfo {
    pub residual: f64,
    pub iterations: usize,
}

/// A coefficient field the CLI can run in.
pub trait Backend: Scalar {
    fn solve(_inst: &Instance<Self>, _data: &DataArgs) -> Result<Prepared<Self>, CliError> {
        Err(CliError::Usage("--solve requires --field complex:BITS".into()))
    }
}

impl Backend for Rational {}
impl Backend for Quadratic {}

const DEFAULT_GUESS: (f64, f64) = (0.5, 0.9);

impl Backend for Complex {
    fn solve(inst: &Instance<Complex>, data: &DataArgs) -> Result<Prepared<Complex>, CliError> {
        let ctx = &inst.ctx;
        let file = &inst.file;
        let tri = &file.triangulation;
        let env = |n: &str| inst.param(n).cloned();
        let mut guess: Vec<Complex> = match &inst.c {
            Some(c) => c.clone(),
            None => (0..tri.num_edge_classes())
                .map(|k| if k == 0 { Complex::one(ctx) } else { ctx.from_f64(DEFAULT_GUESS.0, DEFAULT_GUESS.1) })
                .collect(),
        };
        for g in &data.guesses {
            let (class, e) = g.split_once('=').ok_or_else(|| CliError::Usage(format!("--guess '{g}' is not CLASS=EXPR")))?;
            let class: usize =
                class.trim().parse().map_err(|_| CliError::Usage(format!("--guess '{g}': bad class")))?;
            if class >= guess.len() {
                return Err(CliError::Usage(format!("--guess '{g}': no edge class {class}")));
            }
            let e = Expr::parse(e.trim()).map_err(|err| CliError::Usage(format!("--guess '{g}': {err}")))?;
            guess[class] = e.eval_scalar(ctx, &env).map_err(|err| CliError::Usage(format!("--guess '{g}': {err}")))?;
        }
        let mut free_guess = vec![];
        for name in &data.free {
            free_guess.push(inst.param(name).cloned().unwrap_or_else(|| Complex::one(ctx)));
        }
        let literals = file.sigma.iter().map(|(k, l)| (*k, l.expr.clone())).collect();
        let system = match (file.sigma.is_empty(), data.free.is_empty()) {
            (true, true) => None,
            (true, false) => return Err(CliError::Usage("free parameters need σ lines in the file".into())),
            (false, _) => Some(SigmaSystem { literals, fixed: inst.params.clone(), free: data.free.clone() }),
        };
        let opts = SolverOptions { pin: 0, tolerance: data.tolerance, max_iterations: data.max_iterations };
        let sol = solve_ptolemy(tri, ctx, system.as_ref(), &guess, &free_guess, &opts)?;
        let mut params = inst.params.clone();
        params.extend(sol.free.iter().cloned());
        let sigma = match &system {
            Some(sys) => {
                let env = |n: &str| params.iter().find(|(p, _)| p == n).map(|(_, v)| v.clone());
                Some(SigmaCocycle::from_literals(tri, ctx, &sys.literals, &env)?)
            }
            None => None,
        };
        Ok(Prepared {
            file: file.clone(),
            params,
            c: sol.c,
            sigma,
            theta: None,
            solver: Some(SolverInfo { residual: sol.residual, iterations: sol.iterations }),
        })
    }
}

pub fn prepare<S: Backend>(ctx: &S::Ctx, data: &DataArgs) -> Result<Prepared<S>, CliError> {
    if !data.solve && !(data.free.is_empty() && data.guesses.is_empty()) {
        return Err(CliError::Usage("--free and --guess need --solve".into()));
    }
    let file = read_file(&data.path)?;
    let overrides = data.params.iter().map(|p| parse_override(p)).collect::<Result<Vec<_>, _>>()?;
    let inst = Instance::new(file, ctx, &overrides, &data.free)?;
    if data.solve {
        return S::solve(&inst, data);
    }
    let c = inst.c.clone().ok_or_else(|| CliError::Invalid("the file has no edge values; pass --solve".into()))?;
    Ok(Prepared { file: inst.file, params: inst.params, c, sigma: inst.sigma, theta: inst.theta, solver: None })
}
