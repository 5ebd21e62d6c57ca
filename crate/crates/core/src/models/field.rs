use super::schedule::{check_unit, diffusion_time, NoiseSchedule};
use super::score::ScoreModel;
use crate::error::{Error, Result};
use crate::state::StateVector;

/// A time-dependent vector field integrated forward in the progress index `u`.
///
/// One call to [`Field::drift`] is one model evaluation.
pub trait Field: Send + Sync {
    fn dim(&self) -> usize;

    fn drift(&self, x: &[f64], u: f64) -> Result<StateVector>;

    /// Score-parameterised fields expose their model so DDIM-style steps can use it.
    fn as_diffusion(&self) -> Option<&Diffusion> {
        None
    }
}

/// A score model paired with its noise schedule: the probability-flow ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffusion {
    pub model: ScoreModel,
    pub schedule: NoiseSchedule,
}

impl Diffusion {
    pub fn new(model: ScoreModel, schedule: NoiseSchedule) -> Self {
        Diffusion { model, schedule }
    }

    pub fn score(&self, x: &[f64], s: f64) -> Result<StateVector> {
        self.model.score(&self.schedule, x, s)
    }

    /// `alpha_bar` at progress index `u`.
    pub fn alpha_bar_at(&self, u: f64) -> Result<f64> {
        check_unit(u, "progress index")?;
        self.schedule.alpha_bar(diffusion_time(u))
    }
}

impl Field for Diffusion {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Reverse-time probability-flow field in increasing `u`:
    /// `dx/du = beta(s)/2 * (x + score(x, s))` with `s = 1 - u`.
    fn drift(&self, x: &[f64], u: f64) -> Result<StateVector> {
        check_unit(u, "progress index")?;
        let s = diffusion_time(u);
        let score = self.score(x, s)?;
        let half_beta = 0.5 * self.schedule.beta(s);
        let out: StateVector = x
            .iter()
            .zip(score.iter())
            .map(|(xi, si)| half_beta * (xi + si))
            .collect::<Vec<_>>()
            .into();
        if !out.is_finite() {
            return Err(Error::Numeric(format!("drift at u={u} is not finite")));
        }
        Ok(out)
    }

    fn as_diffusion(&self) -> Option<&Diffusion> {
        Some(self)
    }
}

/// Autonomous linear field `dx/du = rate * x`, used for exact-arithmetic checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField {
    pub dim: usize,
    pub rate: f64,
}

impl LinearField {
    pub fn new(dim: usize, rate: f64) -> Self {
        LinearField { dim, rate }
    }
}

impl Field for LinearField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn drift(&self, x: &[f64], _u: f64) -> Result<StateVector> {
        if x.len() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: x.len(),
            });
        }
        let out: StateVector = x.iter().map(|v| self.rate * v).collect::<Vec<_>>().into();
        if !out.is_finite() {
            return Err(Error::Numeric("linear drift is not finite".into()));
        }
        Ok(out)
    }
}
