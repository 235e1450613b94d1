//! The `cocyclelab` command line: configuration ingestion, one command per
//! invocation, JSON result documents with the resolved configuration embedded.
//!
//! Exit codes: 0 success or Certified, 2 negative verdict, 3 inconclusive or
//! budget exceeded, 1 error.

mod commands;
pub mod config;
mod output;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::base_dynamics::DynamicsError;
use crate::certify::CertifyError;
use crate::cocycle::CocycleError;
use crate::livsic::LivsicError;
use crate::lyapunov::LyapunovError;

pub use config::{parse_config, ExperimentConfig};
pub use output::write_atomic;

pub const VERSION: &str = concat!("cocyclelab ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    PeriodicScan,
    Certify,
    GrowthBound,
    Shadow,
    LivsicCheck,
    LivsicSolve,
    LivsicVerify,
    Contradiction,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::PeriodicScan => "periodic-scan",
            Command::Certify => "certify",
            Command::GrowthBound => "growth-bound",
            Command::Shadow => "shadow",
            Command::LivsicCheck => "livsic-check",
            Command::LivsicSolve => "livsic-solve",
            Command::LivsicVerify => "livsic-verify",
            Command::Contradiction => "contradiction",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cocyclelab", version, about = "Matrix cocycles over subshifts of finite type")]
pub struct Args {
    pub command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (default: `output.dir` from the config, else `out`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides as `--key value`; bare keys go to `params`, dotted keys anywhere.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    pub overrides: Vec<String>,
}

impl Args {
    /// Moves `--out` / `--config` given after the overrides back into their fields.
    pub fn normalize(mut self) -> Self {
        let mut rest = Vec::new();
        let mut it = std::mem::take(&mut self.overrides).into_iter();
        while let Some(a) = it.next() {
            let (flag, inline) = match a.split_once('=') {
                Some((f, v)) => (f.to_string(), Some(v.to_string())),
                None => (a.clone(), None),
            };
            if flag == "--out" || flag == "--config" {
                if let Some(v) = inline.or_else(|| it.next()) {
                    if flag == "--out" {
                        self.out = Some(PathBuf::from(v));
                    } else {
                        self.config = PathBuf::from(v);
                    }
                    continue;
                }
            }
            rest.push(a);
        }
        self.overrides = rest;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    Schema(Vec<String>),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{kind}: {message}")]
    Failed { kind: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => EXIT_INCONCLUSIVE,
            _ => EXIT_ERROR,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Io { path, message } => json!({"kind": "io", "path": path, "message": message}),
            CliError::Schema(problems) => json!({"kind": "schema", "problems": problems}),
            CliError::Budget(message) => json!({"kind": "budget", "message": message}),
            CliError::Failed { kind, message } => json!({"kind": kind, "message": message}),
        }
    }
}

fn dynamics_budget(e: &DynamicsError) -> bool {
    matches!(e, DynamicsError::BudgetExceeded { .. })
}

fn cocycle_budget(e: &CocycleError) -> bool {
    match e {
        CocycleError::ProductTooLong(_) => true,
        CocycleError::Dynamics(d) => dynamics_budget(d),
        _ => false,
    }
}

fn lyapunov_budget(e: &LyapunovError) -> bool {
    match e {
        LyapunovError::Cocycle(c) => cocycle_budget(c),
        LyapunovError::Dynamics(d) => dynamics_budget(d),
        _ => false,
    }
}

fn classify(budget: bool, kind: &'static str, message: String) -> CliError {
    if budget {
        CliError::Budget(message)
    } else {
        CliError::Failed { kind, message }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        classify(dynamics_budget(&e), "dynamics", e.to_string())
    }
}

impl From<CocycleError> for CliError {
    fn from(e: CocycleError) -> Self {
        classify(cocycle_budget(&e), "cocycle", e.to_string())
    }
}

impl From<LyapunovError> for CliError {
    fn from(e: LyapunovError) -> Self {
        classify(lyapunov_budget(&e), "lyapunov", e.to_string())
    }
}

impl From<CertifyError> for CliError {
    fn from(e: CertifyError) -> Self {
        let budget = match &e {
            CertifyError::Lyapunov(l) => lyapunov_budget(l),
            CertifyError::Cocycle(c) => cocycle_budget(c),
            CertifyError::Dynamics(d) => dynamics_budget(d),
            _ => false,
        };
        classify(budget, "certify", e.to_string())
    }
}

impl From<LivsicError> for CliError {
    fn from(e: LivsicError) -> Self {
        let budget = match &e {
            LivsicError::Cocycle(c) => cocycle_budget(c),
            LivsicError::Dynamics(d) => dynamics_budget(d),
            _ => false,
        };
        classify(budget, "livsic", e.to_string())
    }
}

/// What a command produced: the result section, its exit code and extra files.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub status: &'static str,
    pub result: Value,
    /// CSV sweep rows, header first.
    pub csv: Option<String>,
    /// Additional artifacts as `(file name, contents)`.
    pub files: Vec<(String, String)>,
}

/// Runs `command` on a validated configuration without touching the file system
/// (except reading `params.table` for `livsic-verify`).
pub fn run(command: Command, cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    commands::dispatch(command, cfg)
}

/// The result document: deterministic for a fixed configuration.
pub fn result_document(command: Command, cfg: &ExperimentConfig, outcome: &Outcome) -> Value {
    json!({
        "command": command.name(),
        "version": VERSION,
        "config": cfg,
        "status": outcome.status,
        "exit_code": outcome.exit_code,
        "result": outcome.result,
    })
}

pub fn error_document(command: Command, err: &CliError) -> Value {
    json!({
        "command": command.name(),
        "version": VERSION,
        "status": "error",
        "exit_code": err.exit_code(),
        "error": err.to_json(),
    })
}

/// Full invocation: parse, run, write `<out>/<command>.json` (+ `.csv`, sidecar, extra
/// files). Returns the process exit code; a one-line summary goes to stdout.
pub fn main_with(args: Args) -> i32 {
    let args = args.normalize();
    let started = std::time::SystemTime::now();
    let command = args.command;
    let prepared = config::parse_overrides(&args.overrides)
        .and_then(|o| parse_config(&args.config, command, &o));
    let out_dir = args
        .out
        .clone()
        .or_else(|| prepared.as_ref().ok().and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let (code, document, outcome) = match prepared.and_then(|cfg| run(command, &cfg).map(|o| (cfg, o))) {
        Ok((cfg, o)) => (o.exit_code, result_document(command, &cfg, &o), Some(o)),
        Err(e) => (e.exit_code(), error_document(command, &e), None),
    };
    let written = output::write_artifacts(&out_dir, command, &document, outcome.as_ref(), started);
    let summary = match &written {
        Ok(path) => json!({
            "command": command.name(),
            "status": document["status"],
            "exit_code": code,
            "output": path.display().to_string(),
            "error": document.get("error"),
        }),
        Err(e) => json!({
            "command": command.name(),
            "status": "error",
            "exit_code": EXIT_ERROR,
            "error": e.to_json(),
            "unwritten": document,
        }),
    };
    println!("{summary}");
    match written {
        Ok(_) => code,
        Err(_) => EXIT_ERROR,
    }
}
