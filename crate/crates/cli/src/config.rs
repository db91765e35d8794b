//! Run configuration read from a single JSON file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use weyl_bvp::elliptic::ProblemJson;
use weyl_bvp::json::ComplexJson;
use weyl_bvp::opfunc::TauJson;
use weyl_bvp::Window;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Solve,
    Eigen,
    Realize,
    Verify,
    Demo,
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Solve => "solve",
            Action::Eigen => "eigen",
            Action::Realize => "realize",
            Action::Verify => "verify",
            Action::Demo => "demo",
        }
    }
}

/// Right-hand side of `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RhsJson {
    /// Complex Gaussian entries from the run seed.
    Random,
    /// Real expression in `x` (and `y` in 2D) sampled at the interior nodes.
    Expression { expr: String },
    /// JSON array of interior values, relative to the config file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<TauJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
    /// Spectral parameter for `solve`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<ComplexJson>,
    /// Real window for `eigen` (and the correspondence check of `verify`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Scan grid points, default 400.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<RhsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Eigenvalue matching tolerance, default 1e-6.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Sample window of the realization, default `Window::default()`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Window>,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text)?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// The seed, required by every randomized step.
    pub fn seed(&self, what: &str) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config(format!("{what} is randomized and needs a seed (\"seed\" or --seed)")))
    }

    pub fn problem(&self) -> Result<&ProblemJson, CliError> {
        self.problem.as_ref().ok_or_else(|| CliError::Config("missing \"problem\"".into()))
    }

    pub fn tau(&self) -> Result<&TauJson, CliError> {
        self.tau.as_ref().ok_or_else(|| CliError::Config("missing \"tau\"".into()))
    }

    pub fn window(&self) -> Result<[f64; 2], CliError> {
        match self.window {
            Some([a, b]) if a < b => Ok([a, b]),
            Some(w) => Err(CliError::Config(format!("window {w:?} must be increasing"))),
            None => Err(CliError::Config("missing \"window\"".into())),
        }
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-6)
    }
}
