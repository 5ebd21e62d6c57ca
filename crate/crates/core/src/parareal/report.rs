use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sequential,
    Srds,
    SrdsPipelined,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sequential => "sequential",
            Mode::Srds => "srds",
            Mode::SrdsPipelined => "srds-pipelined",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" => Ok(Mode::Sequential),
            "srds" => Ok(Mode::Srds),
            "srds-pipelined" | "pipelined" => Ok(Mode::SrdsPipelined),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Stopping rule for the refinement loop.
///
/// `tau` is compared against the mean absolute per-dimension change of the
/// final block state between consecutive iterations. `tau = 0` never stops
/// early, which pins the iteration count to `max_iters`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub tau: f64,
    /// Defaults to the number of blocks; values above it are clamped.
    pub max_iters: Option<usize>,
}

impl ConvergenceConfig {
    pub fn new(tau: f64, max_iters: Option<usize>) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::config("tau", format!("must be finite and >= 0, got {tau}")));
        }
        if max_iters == Some(0) {
            return Err(Error::config("max_iters", "must be at least 1"));
        }
        Ok(ConvergenceConfig { tau, max_iters })
    }

    /// Exactly `iters` refinements, no early exit.
    pub fn fixed(iters: usize) -> Result<Self> {
        Self::new(0.0, Some(iters))
    }

    pub fn iteration_cap(&self, n_blocks: usize) -> usize {
        self.max_iters.unwrap_or(n_blocks).min(n_blocks)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: Mode,
    pub total_evals: u64,
    pub eff_serial_evals: u64,
    pub iters: usize,
    /// Mean absolute change of the final state, one entry per refinement.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl SolveReport {
    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }
}
