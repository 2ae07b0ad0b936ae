//! The `oneloop` command-line tool.
//!
//! Every command produces one JSON record; `--format text` renders the same
//! record as `key: value` lines.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

mod backend;
mod commands;
mod error;

pub use backend::{Backend, Prepared};
pub use error::{CliError, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

use oneloop_core::scalars::{Complex, ComplexField, QuadraticField, Quadratic, Rational};
use oneloop_core::triangulation::{parse_triangulation, TriangulationFile};

/// Coefficient field selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSpec {
    Rational,
    Quadratic(i64),
    Complex(usize),
}

impl FieldSpec {
    pub fn parse(text: &str) -> Result<Self, String> {
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (text, None),
        };
        match (kind, arg) {
            ("rational", None) => Ok(FieldSpec::Rational),
            ("quadratic", None) => Ok(FieldSpec::Quadratic(-3)),
            ("quadratic", Some(d)) => {
                let d: i64 = d.parse().map_err(|_| format!("bad discriminant '{d}'"))?;
                QuadraticField::new(d).map_err(|e| e.to_string())?;
                Ok(FieldSpec::Quadratic(d))
            }
            ("complex", None) => Ok(FieldSpec::Complex(256)),
            ("complex", Some(b)) => match b.parse::<usize>() {
                Ok(bits) if bits >= 64 => Ok(FieldSpec::Complex(bits)),
                _ => Err(format!("precision must be an integer ≥ 64, got '{b}'")),
            },
            _ => Err(format!("unknown field '{text}' (expected rational, quadratic:D or complex:BITS)")),
        }
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldSpec::Rational => write!(f, "rational"),
            FieldSpec::Quadratic(d) => write!(f, "quadratic:{d}"),
            FieldSpec::Complex(b) => write!(f, "complex:{b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "oneloop", version, about = "1-loop invariant of ordered ideal triangulations")]
pub struct Cli {
    /// rational, quadratic:D (square-free D) or complex:BITS.
    #[arg(long, global = true, env = "ONELOOP_FIELD", default_value = "quadratic:-3", value_parser = FieldSpec::parse)]
    pub field: FieldSpec,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

/// Input file plus parameter and solver options.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    pub path: PathBuf,
    /// Overrides a declared parameter, e.g. `--param m=2`.
    #[arg(long = "param", value_name = "NAME=EXPR")]
    pub params: Vec<String>,
    /// Solves the Ptolemy equations numerically (complex field only).
    #[arg(long)]
    pub solve: bool,
    /// Parameter solved for together with the edge values (with `--solve`).
    #[arg(long, value_name = "NAME")]
    pub free: Vec<String>,
    /// Initial value of an edge class, e.g. `--guess 1=1/2+sqrt(-1)`.
    #[arg(long = "guess", value_name = "CLASS=EXPR")]
    pub guesses: Vec<String>,
    #[arg(long, default_value_t = 1e-30)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Parses and validates a triangulation file.
    Validate { path: PathBuf },
    /// The 1-loop invariant δ, or δ(t) with `--twist`.
    Oneloop {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        twist: bool,
        /// Requires σ data in the file.
        #[arg(long)]
        deformed: bool,
        /// `auto` or one local edge per tetrahedron, e.g. `03,12`.
        #[arg(long, default_value = "auto")]
        edge_choice: String,
    },
    /// Kernel of the face matrix at t = 1.
    Kernel {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "auto")]
        edge_choice: String,
    },
    /// Builds the natural cocycle and verifies it.
    Cocycle {
        #[command(flatten)]
        data: DataArgs,
        /// Lifts to θ ≠ 0 through the face-matrix kernel.
        #[arg(long)]
        lift: bool,
        #[arg(long, default_value = "auto")]
        edge_choice: String,
    },
    /// 2–3 Pachner moves.
    Pachner {
        #[command(subcommand)]
        action: PachnerAction,
    },
    /// Solves the Ptolemy equations and prints the solution.
    Solve {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Randomized OSp(2|1) identities over ℚ.
    Selfcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        cases: u64,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum PachnerAction {
    /// Compares δ(t) before and after one move.
    Check {
        #[command(flatten)]
        data: DataArgs,
        /// The two tetrahedra, e.g. `0,1`.
        #[arg(long, value_name = "A,B")]
        tets: String,
        /// Face slot of the first tetrahedron.
        #[arg(long)]
        face: usize,
        /// Compare up to a nonzero scalar.
        #[arg(long)]
        deformed: bool,
    },
}

/// What the binary prints and returns.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: Option<String>,
    pub code: i32,
}

pub type Record = Map<String, Value>;

/// Runs a command; command-level failures become exit codes.
pub fn run(cli: &Cli) -> Outcome {
    match dispatch(cli) {
        Ok((record, code)) => Outcome { stdout: render(&record, cli.format), stderr: None, code },
        Err(e) => {
            let mut record = Record::new();
            record.insert("error".into(), Value::String(e.kind().into()));
            record.insert("message".into(), Value::String(e.to_string()));
            Outcome { stdout: render(&record, cli.format), stderr: Some(e.to_string()), code: e.exit_code() }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(Record, i32), CliError> {
    match cli.field {
        FieldSpec::Rational => commands::execute::<Rational>(&(), cli),
        FieldSpec::Quadratic(d) => commands::execute::<Quadratic>(&QuadraticField::new(d)?, cli),
        FieldSpec::Complex(bits) => commands::execute::<Complex>(&ComplexField::new(bits), cli),
    }
}

pub fn read_file(path: &Path) -> Result<TriangulationFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    Ok(parse_triangulation(&text)?)
}

pub fn render(record: &Record, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&Value::Object(record.clone())).expect("serializable"),
        Format::Text => {
            let mut lines = vec![];
            if let Some(Value::String(s)) = record.get("summary") {
                lines.push(s.clone());
            }
            for (k, v) in record.iter().filter(|(k, _)| k.as_str() != "summary") {
                flatten(k, v, &mut lines);
            }
            lines.join("\n")
        }
    }
}

fn flatten(key: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                flatten(&format!("{key}.{k}"), x, out);
            }
        }
        Value::String(s) => out.push(format!("{key}: {s}")),
        other => out.push(format!("{key}: {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs() {
        assert_eq!(FieldSpec::parse("rational"), Ok(FieldSpec::Rational));
        assert_eq!(FieldSpec::parse("quadratic"), Ok(FieldSpec::Quadratic(-3)));
        assert_eq!(FieldSpec::parse("quadratic:5"), Ok(FieldSpec::Quadratic(5)));
        assert_eq!(FieldSpec::parse("complex:128"), Ok(FieldSpec::Complex(128)));
        assert!(FieldSpec::parse("quadratic:12").is_err());
        assert!(FieldSpec::parse("complex:8").is_err());
        assert!(FieldSpec::parse("real").is_err());
        assert_eq!(FieldSpec::Quadratic(-7).to_string(), "quadratic:-7");
    }

    #[test]
    fn text_rendering() {
        let mut r = Record::new();
        r.insert("a".into(), Value::from(1));
        r.insert("summary".into(), Value::from("head"));
        r.insert("b".into(), serde_json::json!({"x": "y", "z": [1, 2]}));
        assert_eq!(render(&r, Format::Text), "head\na: 1\nb.x: y\nb.z: [1,2]");
    }
}
