//! Errors and their exit codes.

use oneloop_core::instance::InstanceError;
use oneloop_core::oneloop::OneLoopError;
use oneloop_core::pachner::PachnerError;
use oneloop_core::ptolemy::PtolemyError;
use oneloop_core::scalars::ScalarError;
use oneloop_core::triangulation::TriangulationError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Ptolemy(#[from] PtolemyError),
    #[error(transparent)]
    OneLoop(#[from] OneLoopError),
    #[error(transparent)]
    Pachner(#[from] PachnerError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

fn ptolemy_code(e: &PtolemyError) -> i32 {
    match e {
        PtolemyError::SingularJacobian(_)
        | PtolemyError::NoConvergence { .. }
        | PtolemyError::ZeroGuess(_)
        | PtolemyError::Scalar(_) => EXIT_NUMERIC,
        _ => EXIT_VALIDATION,
    }
}

fn oneloop_code(e: &OneLoopError) -> i32 {
    match e {
        OneLoopError::ChoiceLength { .. } | OneLoopError::ChoiceInvalid(_) => EXIT_USAGE,
        OneLoopError::WeightsMissing | OneLoopError::NotPtolemy(_) => EXIT_VALIDATION,
        OneLoopError::ZeroPrefactor | OneLoopError::Scalar(_) => EXIT_NUMERIC,
        OneLoopError::Ptolemy(p) => ptolemy_code(p),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Invalid(_) | CliError::Triangulation(_) => EXIT_VALIDATION,
            CliError::Instance(InstanceError::BadOverride(_) | InstanceError::OverrideParse { .. }) => EXIT_USAGE,
            CliError::Instance(InstanceError::Ptolemy(p)) | CliError::Ptolemy(p) => ptolemy_code(p),
            CliError::Instance(_) => EXIT_VALIDATION,
            CliError::OneLoop(e) => oneloop_code(e),
            CliError::Pachner(e) => match e {
                PachnerError::NoSuchTet(_)
                | PachnerError::NotAdjacent { .. }
                | PachnerError::NoSuchFace(_)
                | PachnerError::SameTet => EXIT_USAGE,
                PachnerError::OrderingObstruction | PachnerError::Triangulation(_) => EXIT_VALIDATION,
                PachnerError::DegenerateTransport(_) | PachnerError::TransportFailed(_) => EXIT_NUMERIC,
                PachnerError::Ptolemy(p) => ptolemy_code(p),
                PachnerError::OneLoop(o) => oneloop_code(o),
            },
            CliError::Scalar(ScalarError::InvalidField(_)) => EXIT_USAGE,
            CliError::Scalar(_) => EXIT_NUMERIC,
        }
    }

    /// A short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_VALIDATION => "validation",
            EXIT_NUMERIC => "numeric",
            _ => "usage",
        }
    }
}
