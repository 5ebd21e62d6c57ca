use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance-preserving schedule with a linear rate `beta(s)` on diffusion time `s in [0, 1]`.
///
/// `s = 0` is data and `s = 1` is (approximately) pure noise. Public sampling APIs
/// run on the reversed progress index `u = 1 - s`, see [`diffusion_time`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        NoiseSchedule {
            beta_min: 0.1,
            beta_max: 20.0,
        }
    }
}

impl NoiseSchedule {
    pub fn new(beta_min: f64, beta_max: f64) -> Result<Self> {
        if !(beta_min.is_finite() && beta_max.is_finite()) || beta_min <= 0.0 || beta_max < beta_min {
            return Err(Error::config(
                "schedule",
                format!("need 0 < beta_min <= beta_max, got ({beta_min}, {beta_max})"),
            ));
        }
        Ok(NoiseSchedule { beta_min, beta_max })
    }

    pub fn beta(&self, s: f64) -> f64 {
        self.beta_min + s * (self.beta_max - self.beta_min)
    }

    /// `int_0^s beta(r) dr`.
    pub fn integrated_beta(&self, s: f64) -> f64 {
        self.beta_min * s + 0.5 * (self.beta_max - self.beta_min) * s * s
    }

    pub fn alpha_bar(&self, s: f64) -> Result<f64> {
        check_unit(s, "diffusion time")?;
        Ok((-self.integrated_beta(s)).exp())
    }
}

/// Map the denoising progress index `u` (0 = noise, 1 = data) to diffusion time.
pub fn diffusion_time(u: f64) -> f64 {
    1.0 - u
}

pub(crate) fn check_unit(t: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("{what} {t} outside [0, 1]")));
    }
    Ok(())
}
