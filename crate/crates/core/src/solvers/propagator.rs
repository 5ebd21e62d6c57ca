use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::discretization::Discretization;
use super::meter::EvalMeter;
use crate::error::{Error, Result};
use crate::models::{diffusion_time, eps_from_score, Field};
use crate::state::StateVector;

/// Rounding slack allowed when a step lands just past `u = 1`.
const END_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Euler,
    Heun,
    Ddim,
}

impl SolverKind {
    pub fn evals_per_step(self) -> u64 {
        match self {
            SolverKind::Euler | SolverKind::Ddim => 1,
            SolverKind::Heun => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Euler => "euler",
            SolverKind::Heun => "heun",
            SolverKind::Ddim => "ddim",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(SolverKind::Euler),
            "heun" => Ok(SolverKind::Heun),
            "ddim" => Ok(SolverKind::Ddim),
            other => Err(Error::config("solver", format!("unknown solver `{other}`"))),
        }
    }
}

/// How many solver steps a propagator spends on one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    /// One step per fine grid interval.
    Fine,
    /// A fixed number of equal sub-steps per block, capped at the block width.
    Steps(usize),
}

/// A solver bound to a field: maps a state across a span of the fine grid.
#[derive(Clone, Copy)]
pub struct Propagator<'a> {
    pub kind: SolverKind,
    pub resolution: Resolution,
    field: &'a dyn Field,
}

impl fmt::Debug for Propagator<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Propagator")
            .field("kind", &self.kind)
            .field("resolution", &self.resolution)
            .field("dim", &self.field.dim())
            .finish()
    }
}

impl<'a> Propagator<'a> {
    pub fn new(kind: SolverKind, field: &'a dyn Field, resolution: Resolution) -> Result<Self> {
        if let Resolution::Steps(0) = resolution {
            return Err(Error::config("resolution", "a propagator needs at least one step"));
        }
        if kind == SolverKind::Ddim && field.as_diffusion().is_none() {
            return Err(Error::Unsupported(
                "ddim steps need a score model with a noise schedule".into(),
            ));
        }
        Ok(Propagator {
            kind,
            resolution,
            field,
        })
    }

    /// Fine-resolution propagator, one step per grid interval.
    pub fn fine(kind: SolverKind, field: &'a dyn Field) -> Result<Self> {
        Self::new(kind, field, Resolution::Fine)
    }

    /// Single-step-per-block propagator.
    pub fn coarse(kind: SolverKind, field: &'a dyn Field) -> Result<Self> {
        Self::new(kind, field, Resolution::Steps(1))
    }

    pub fn field(&self) -> &'a dyn Field {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn euler_step(&self, x: &StateVector, u: f64, du: f64, meter: &EvalMeter) -> Result<StateVector> {
        check_step(u, du)?;
        meter.tick(1);
        let k1 = self.field.drift(x, u)?;
        Ok(x.iter().zip(k1.iter()).map(|(xi, ki)| xi + ki * du).collect::<Vec<_>>().into())
    }

    pub fn heun_step(&self, x: &StateVector, u: f64, du: f64, meter: &EvalMeter) -> Result<StateVector> {
        check_step(u, du)?;
        self.heun_to(x, u, (u + du).min(1.0), du, meter)
    }

    fn heun_to(&self, x: &StateVector, u: f64, u_next: f64, du: f64, meter: &EvalMeter) -> Result<StateVector> {
        meter.tick(1);
        let k1 = self.field.drift(x, u)?;
        let predictor: StateVector = x
            .iter()
            .zip(k1.iter())
            .map(|(xi, ki)| xi + ki * du)
            .collect::<Vec<_>>()
            .into();
        meter.tick(1);
        let k2 = self.field.drift(&predictor, u_next)?;
        Ok(x
            .iter()
            .zip(k1.iter().zip(k2.iter()))
            .map(|(xi, (a, b))| xi + 0.5 * (a + b) * du)
            .collect::<Vec<_>>()
            .into())
    }

    /// Deterministic DDIM update from `u` to `u_next`, written in terms of the score.
    pub fn ddim_step(&self, x: &StateVector, u: f64, u_next: f64, meter: &EvalMeter) -> Result<StateVector> {
        let diffusion = self.field.as_diffusion().ok_or_else(|| {
            Error::Unsupported("ddim steps need a score model with a noise schedule".into())
        })?;
        if u_next == u {
            return Ok(x.clone());
        }
        let a = diffusion.alpha_bar_at(u)?;
        let a_next = diffusion.alpha_bar_at(u_next)?;
        if a_next.is_nan() || a.is_nan() || a_next <= a {
            return Err(Error::Orientation { u, u_next });
        }
        meter.tick(1);
        let score = diffusion.score(x, diffusion_time(u))?;
        let eps = eps_from_score(&score, a)?;
        let ratio = (a_next / a).sqrt();
        let eps_coef = (1.0 - a_next).sqrt() - ratio * (1.0 - a).sqrt();
        let out: StateVector = x
            .iter()
            .zip(eps.iter())
            .map(|(xi, ei)| ratio * xi + eps_coef * ei)
            .collect::<Vec<_>>()
            .into();
        if !out.is_finite() {
            return Err(Error::Numeric(format!("ddim update from u={u} is not finite")));
        }
        Ok(out)
    }

    /// One solver step between fine nodes `j` and `j_next`.
    pub fn step(
        &self,
        x: &StateVector,
        j: usize,
        j_next: usize,
        disc: &Discretization,
        meter: &EvalMeter,
    ) -> Result<StateVector> {
        let u = disc.node(j);
        let u_next = disc.node(j_next);
        let out = match self.kind {
            SolverKind::Euler => self.euler_step(x, u, u_next - u, meter),
            SolverKind::Heun => self.heun_to(x, u, u_next, u_next - u, meter),
            SolverKind::Ddim => self.ddim_step(x, u, u_next, meter),
        };
        out.map_err(|e| match e {
            Error::Numeric(msg) => Error::Numeric(format!("{msg} (fine node {j})")),
            other => other,
        })
    }

    /// Compose `n_steps` solver steps across fine nodes `j_start..j_end`.
    ///
    /// Sub-steps have width `span / n_steps` in fine intervals and the last one
    /// absorbs the remainder. A zero-width span is the identity.
    pub fn propagate(
        &self,
        x: &StateVector,
        j_start: usize,
        j_end: usize,
        n_steps: usize,
        disc: &Discretization,
        meter: &EvalMeter,
    ) -> Result<StateVector> {
        if j_start > j_end || j_end > disc.n_fine() {
            return Err(Error::Index(format!(
                "span {j_start}..{j_end} on a grid of {} steps",
                disc.n_fine()
            )));
        }
        x.ensure_dim(self.dim())?;
        let span = j_end - j_start;
        if span == 0 {
            return Ok(x.clone());
        }
        if n_steps == 0 || n_steps > span {
            return Err(Error::Domain(format!(
                "{n_steps} steps cannot split a span of {span} fine intervals"
            )));
        }
        let width = span / n_steps;
        let mut state = x.clone();
        let mut j = j_start;
        for k in 0..n_steps {
            let j_next = if k + 1 == n_steps { j_end } else { j + width };
            state = self.step(&state, j, j_next, disc, meter)?;
            j = j_next;
        }
        Ok(state)
    }

    /// Number of steps this propagator takes on block `i`.
    pub fn steps_for_block(&self, i: usize, disc: &Discretization) -> usize {
        let (start, end) = disc.block_span(i);
        match self.resolution {
            Resolution::Fine => end - start,
            Resolution::Steps(k) => k.min(end - start),
        }
    }

    /// Model evaluations spent on block `i`.
    pub fn block_cost(&self, i: usize, disc: &Discretization) -> u64 {
        self.steps_for_block(i, disc) as u64 * self.kind.evals_per_step()
    }

    /// Propagate across block `i` at this propagator's resolution.
    pub fn solve_block(
        &self,
        x: &StateVector,
        i: usize,
        disc: &Discretization,
        meter: &EvalMeter,
    ) -> Result<StateVector> {
        let (start, end) = disc.block_span(i);
        self.propagate(x, start, end, self.steps_for_block(i, disc), disc, meter)
    }
}

fn check_step(u: f64, du: f64) -> Result<()> {
    if du.is_nan() || du <= 0.0 || !(0.0..=1.0).contains(&u) || u + du > 1.0 + END_SLACK {
        return Err(Error::Domain(format!("step from u={u} by du={du} leaves [0, 1]")));
    }
    Ok(())
}
