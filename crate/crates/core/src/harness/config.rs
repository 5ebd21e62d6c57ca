use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::presets::{resolve_model, ModelField, Preset};
use crate::error::{Error, Result};
use crate::parareal::{optimal_block_size, ConvergenceConfig, Mode};
use crate::solvers::{Discretization, SolverKind};

/// What a run executes: one sampler, or all three on the same noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Sequential,
    Srds,
    SrdsPipelined,
    Compare,
}

impl RunMode {
    pub fn modes(self) -> Vec<Mode> {
        match self {
            RunMode::Sequential => vec![Mode::Sequential],
            RunMode::Srds => vec![Mode::Srds],
            RunMode::SrdsPipelined => vec![Mode::SrdsPipelined],
            RunMode::Compare => vec![Mode::Sequential, Mode::Srds, Mode::SrdsPipelined],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Compare => "compare",
            RunMode::Sequential => "sequential",
            RunMode::Srds => "srds",
            RunMode::SrdsPipelined => "srds-pipelined",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "compare" {
            return Ok(RunMode::Compare);
        }
        Ok(match s.parse::<Mode>()? {
            Mode::Sequential => RunMode::Sequential,
            Mode::Srds => RunMode::Srds,
            Mode::SrdsPipelined => RunMode::SrdsPipelined,
        })
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Preset name or path to a model JSON file.
    pub model: String,
    /// Required for presets; checked against the file otherwise.
    #[serde(default)]
    pub dim: Option<usize>,
    pub solver: SolverKind,
    /// Fine grid size `N`.
    pub steps: usize,
    /// Defaults to the block count minimising per-iteration cost.
    #[serde(default)]
    pub blocks: Option<usize>,
    pub tau: f64,
    /// `None` allows one refinement per block.
    #[serde(default)]
    pub max_iters: Option<usize>,
    pub mode: RunMode,
    pub seed: u64,
    /// Defaults to the block count.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gantt: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: Preset::Gaussian.name().to_string(),
            dim: Some(2),
            solver: SolverKind::Ddim,
            steps: 64,
            blocks: None,
            tau: 1e-3,
            max_iters: None,
            mode: RunMode::Srds,
            seed: 0,
            workers: None,
            out: None,
            residuals: None,
            gantt: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if self.dim == Some(0) {
            return Err(Error::config("dim", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if self.solver == SolverKind::Ddim && Preset::from_name(&self.model) == Some(Preset::Linear) {
            return Err(Error::config("solver", "ddim needs a score model; the linear preset has none"));
        }
        if self.gantt.is_some() && !self.mode.modes().contains(&Mode::SrdsPipelined) {
            return Err(Error::config("gantt", "only pipelined runs have a schedule to export"));
        }
        self.convergence()?;
        self.discretization()?;
        Ok(())
    }

    pub fn n_blocks(&self) -> Result<usize> {
        match self.blocks {
            Some(b) => Ok(b),
            None if self.steps < 2 => Ok(1),
            None => optimal_block_size(self.steps),
        }
    }

    pub fn worker_count(&self) -> Result<usize> {
        match self.workers {
            Some(w) => Ok(w),
            None => self.n_blocks(),
        }
    }

    pub fn discretization(&self) -> Result<Discretization> {
        Discretization::new(self.steps, self.n_blocks()?)
    }

    pub fn convergence(&self) -> Result<ConvergenceConfig> {
        ConvergenceConfig::new(self.tau, self.max_iters)
    }

    pub fn build_model(&self) -> Result<ModelField> {
        resolve_model(&self.model, self.dim)
    }
}
