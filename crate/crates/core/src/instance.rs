//! A parsed triangulation file evaluated over a concrete field.

use thiserror::Error;

use crate::expr::{EvalError, Expr, ParseError};
use crate::grassmann::Grassmann;
use crate::ptolemy::{PtolemyError, SigmaCocycle};
use crate::scalars::Scalar;
use crate::triangulation::{Triangulation, TriangulationFile};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("parameter {name}: {source}")]
    Param { name: String, source: EvalError },
    #[error("parameter override '{0}' is not of the form name=literal")]
    BadOverride(String),
    #[error("parameter override {name}: {source}")]
    OverrideParse { name: String, source: ParseError },
    #[error("edge value {class}: {source}")]
    Edge { class: usize, source: EvalError },
    #[error("face value {class}: {source}")]
    Face { class: usize, source: EvalError },
    #[error("edge values given for {given} of {total} edge classes")]
    PartialEdges { given: usize, total: usize },
    #[error(transparent)]
    Ptolemy(#[from] PtolemyError),
}

/// Splits `name=literal`.
pub fn parse_override(text: &str) -> Result<(String, Expr), InstanceError> {
    let (name, lit) = text.split_once('=').ok_or_else(|| InstanceError::BadOverride(text.to_string()))?;
    let name = name.trim().to_string();
    if name.is_empty() {
        return Err(InstanceError::BadOverride(text.to_string()));
    }
    let expr = Expr::parse(lit.trim()).map_err(|source| InstanceError::OverrideParse { name: name.clone(), source })?;
    Ok((name, expr))
}

#[derive(Debug, Clone)]
pub struct Instance<S: Scalar> {
    pub file: TriangulationFile,
    pub ctx: S::Ctx,
    /// Parameter values in declaration order, overrides applied.
    pub params: Vec<(String, S)>,
    /// Parameters left unevaluated because they are solved for.
    pub free: Vec<String>,
    pub sigma: Option<SigmaCocycle<S>>,
    pub c: Option<Vec<S>>,
    /// Face values with their Grassmann rank, when any are given.
    pub theta: Option<Vec<Grassmann<S>>>,
}

impl<S: Scalar> Instance<S> {
    /// Evaluates parameters (later ones may refer to earlier ones), σ, edge
    /// and face values.  Parameters named in `free` are skipped along with σ.
    pub fn new(
        file: TriangulationFile,
        ctx: &S::Ctx,
        overrides: &[(String, Expr)],
        free: &[String],
    ) -> Result<Self, InstanceError> {
        let mut params: Vec<(String, S)> = vec![];
        let mut decls: Vec<(String, Expr)> = file.params.iter().map(|(n, l)| (n.clone(), l.expr.clone())).collect();
        for (name, e) in overrides {
            match decls.iter_mut().find(|(n, _)| n == name) {
                Some(slot) => slot.1 = e.clone(),
                None => decls.push((name.clone(), e.clone())),
            }
        }
        for (name, e) in &decls {
            if free.contains(name) {
                continue;
            }
            let env = |v: &str| params.iter().find(|(n, _)| n == v).map(|(_, x)| x.clone());
            let value = e.eval_scalar(ctx, &env).map_err(|source| InstanceError::Param { name: name.clone(), source })?;
            params.push((name.clone(), value));
        }
        let env = |v: &str| params.iter().find(|(n, _)| n == v).map(|(_, x)| x.clone());
        let tri = &file.triangulation;
        let sigma = if file.sigma.is_empty() || !free.is_empty() {
            None
        } else {
            let lits = file.sigma.iter().map(|(k, l)| (*k, l.expr.clone())).collect();
            Some(SigmaCocycle::from_literals(tri, ctx, &lits, &env)?)
        };
        let c = if file.c.is_empty() {
            None
        } else if file.c.len() != tri.num_edge_classes() {
            return Err(InstanceError::PartialEdges { given: file.c.len(), total: tri.num_edge_classes() });
        } else {
            Some(
                file.c
                    .iter()
                    .map(|(k, l)| l.expr.eval_scalar(ctx, &env).map_err(|source| InstanceError::Edge { class: *k, source }))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        };
        let theta = if file.theta.is_empty() {
            None
        } else {
            let rank = file.theta.values().map(|l| l.expr.max_generator()).max().unwrap_or(0).max(1) as u8;
            let mut out = vec![Grassmann::zero(rank, ctx); tri.num_face_classes()];
            for (k, l) in &file.theta {
                out[*k] =
                    l.expr.eval_grassmann(rank, ctx, &env).map_err(|source| InstanceError::Face { class: *k, source })?;
            }
            Some(out)
        };
        Ok(Instance { ctx: ctx.clone(), params, free: free.to_vec(), sigma, c, theta, file })
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.file.triangulation
    }

    pub fn param(&self, name: &str) -> Option<&S> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}
