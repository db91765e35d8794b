//! Batch driver for `weyl-bvp`: reads a JSON run configuration, runs one
//! action and writes `report.json` plus CSV tables to the output directory.
//!
//! Exit codes: 0 success, 1 configuration error, 2 math-domain error (a
//! spectral point, a pole, a singular coupling), 3 internal or I/O error and
//! failed `verify` checks.

pub mod actions;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Value};
use thiserror::Error;

pub use config::{Action, RhsJson, RunConfig};
use output::Artifacts;

#[derive(Debug, Parser)]
#[command(name = "weyl-bvp", version, about = "Elliptic problems with λ-dependent boundary conditions")]
pub struct Args {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the action of the config.
    #[arg(long, value_enum)]
    pub action: Option<Action>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Overrides the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the eigenvalue matching tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Math(weyl_bvp::Error),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl From<weyl_bvp::Error> for CliError {
    fn from(e: weyl_bvp::Error) -> Self {
        if e.is_domain() {
            CliError::Math(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Math(_) => 2,
            CliError::Io { .. } | CliError::Internal(_) | CliError::VerifyFailed(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "ConfigError",
            CliError::Math(e) => e.kind(),
            CliError::Io { .. } => "IOError",
            CliError::Internal(_) => "InternalError",
            CliError::VerifyFailed(_) => "VerifyFailed",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Math(weyl_bvp::Error::OutsideU { lambda, sigma_min }) = self {
            v["lambda"] = json!([lambda.re, lambda.im]);
            v["sigma_min"] = json!(sigma_min);
        }
        v
    }
}

/// The canned demo configurations: constant τ, λ-linear τ, rational τ with two terms.
pub const DEMOS: [(&str, &str); 3] = [
    ("constant", include_str!("../demos/constant.json")),
    ("lambda_linear", include_str!("../demos/lambda_linear.json")),
    ("rational_m2", include_str!("../demos/rational_m2.json")),
];

fn run_action(action: Action, cfg: &RunConfig, dir: &Path) -> Result<actions::Outcome, CliError> {
    let mut art = Artifacts::default();
    let outcome = match action {
        Action::Solve => actions::solve(cfg, &mut art)?,
        Action::Eigen => actions::eigen(cfg, &mut art)?,
        Action::Realize => actions::realize_action(cfg, &mut art)?,
        Action::Verify => actions::verify(cfg, &mut art)?,
        Action::Demo => return demo(cfg, dir),
    };
    art.write(dir, &outcome.report)?;
    Ok(outcome)
}

/// Runs `verify` and `eigen` on every demo, each into its own subdirectory.
fn demo(overrides: &RunConfig, dir: &Path) -> Result<actions::Outcome, CliError> {
    let mut summary = vec![];
    let mut passed = true;
    for (name, text) in DEMOS {
        let mut cfg = RunConfig::parse(text)?;
        cfg.seed = overrides.seed.or(cfg.seed);
        cfg.tol = overrides.tol.or(cfg.tol);
        let sub = dir.join(name);
        let v = run_action(Action::Verify, &cfg, &sub.join("verify"))?;
        let e = run_action(Action::Eigen, &cfg, &sub.join("eigen"))?;
        passed &= v.passed && e.passed;
        summary.push(json!({
            "demo": name,
            "verify": v.passed,
            "eigen": e.passed,
            "eigenvalues": e.report["eigenvalues"].as_array().map(|a| {
                a.iter().map(|x| x["lambda"][0].clone()).collect::<Vec<_>>()
            }),
        }));
    }
    let report = json!({ "action": "demo", "demos": summary, "passed": passed });
    Artifacts::default().write(dir, &report)?;
    Ok(actions::Outcome { report, passed })
}

/// Runs the configured action; `verify` and `demo` fail when a check fails.
pub fn run(args: &Args) -> Result<actions::Outcome, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.seed = args.seed.or(cfg.seed);
    cfg.tol = args.tol.or(cfg.tol);
    if let Some(t) = cfg.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
        }
    }
    let action = args
        .action
        .or(cfg.action)
        .ok_or_else(|| CliError::Config("no action given (\"action\" or --action)".into()))?;
    if args.config.is_none() && action != Action::Demo {
        return Err(CliError::Config(format!("{} needs --config", action.name())));
    }
    let outcome = run_action(action, &cfg, &args.out)?;
    if matches!(action, Action::Verify | Action::Demo) && !outcome.passed {
        return Err(CliError::VerifyFailed(format!("see {}", args.out.join("report.json").display())));
    }
    Ok(outcome)
}

/// Entry point of the binary: sets up the thread pool, runs, reports errors
/// as JSON on stderr (and in `report.json` when possible), returns the exit code.
pub fn execute(args: &Args) -> u8 {
    let result = match args.jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(args)),
            Err(e) => Err(CliError::Internal(e.to_string())),
        },
        None => run(args),
    };
    match result {
        Ok(_) => {
            println!("ok: wrote {}", args.out.join("report.json").display());
            0
        }
        Err(e) => {
            let err = e.to_json();
            eprintln!("{err}");
            if !matches!(e, CliError::VerifyFailed(_) | CliError::Io { .. })
                && output::create_dir(&args.out).is_ok()
            {
                let _ = output::write_json(&args.out.join("report.json"), &json!({ "status": "error", "error": err }));
            }
            e.exit_code()
        }
    }
}
