use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::schedule::NoiseSchedule;
use crate::error::{Error, Result};
use crate::state::StateVector;

/// Score models. The analytic variants return the exact gradient of the log
/// density of the data distribution after VP diffusion to time `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ScoreModel {
    /// Diagonal Gaussian data distribution.
    Gaussian { mu: Vec<f64>, var: Vec<f64> },
    /// Diagonal Gaussian mixture.
    Gmm {
        w: Vec<f64>,
        mu: Vec<Vec<f64>>,
        var: Vec<Vec<f64>>,
    },
    /// Network evaluated on `(x, s)`.
    Mlp(Mlp),
}

impl ScoreModel {
    pub fn gaussian(mu: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        let model = ScoreModel::Gaussian { mu, var };
        model.validate()?;
        Ok(model)
    }

    pub fn gmm(w: Vec<f64>, mu: Vec<Vec<f64>>, var: Vec<Vec<f64>>) -> Result<Self> {
        let model = ScoreModel::Gmm { w, mu, var };
        model.validate()?;
        Ok(model)
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let model: ScoreModel = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn dim(&self) -> usize {
        match self {
            ScoreModel::Gaussian { mu, .. } => mu.len(),
            ScoreModel::Gmm { mu, .. } => mu.first().map_or(0, Vec::len),
            ScoreModel::Mlp(net) => net.dims,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScoreModel::Gaussian { mu, var } => {
                if mu.is_empty() {
                    return Err(Error::config("mu", "empty mean vector"));
                }
                if var.len() != mu.len() {
                    return Err(Error::config("var", "length differs from mu"));
                }
                check_params(mu, var, "")
            }
            ScoreModel::Gmm { w, mu, var } => {
                if w.is_empty() {
                    return Err(Error::config("w", "mixture needs at least one component"));
                }
                if mu.len() != w.len() || var.len() != w.len() {
                    return Err(Error::config("mu", "w, mu and var must have one entry per component"));
                }
                if w.iter().any(|&wk| !wk.is_finite() || wk <= 0.0) {
                    return Err(Error::config("w", "weights must be positive"));
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::config("w", format!("weights sum to {total}, not 1")));
                }
                let d = mu[0].len();
                if d == 0 {
                    return Err(Error::config("mu", "empty mean vector"));
                }
                for (k, (m, v)) in mu.iter().zip(var).enumerate() {
                    if m.len() != d || v.len() != d {
                        return Err(Error::config(
                            format!("mu[{k}]"),
                            "all components must share one dimension",
                        ));
                    }
                    check_params(m, v, &format!("[{k}]"))?;
                }
                Ok(())
            }
            ScoreModel::Mlp(net) => net.validate(),
        }
    }

    /// `grad_x log p_s(x)`.
    pub fn score(&self, schedule: &NoiseSchedule, x: &[f64], s: f64) -> Result<StateVector> {
        self.check_input(x)?;
        let abar = schedule.alpha_bar(s)?;
        let out = match self {
            ScoreModel::Gaussian { mu, var } => {
                let m = abar.sqrt();
                x.iter()
                    .zip(mu.iter().zip(var))
                    .map(|(&xi, (&mi, &vi))| -(xi - m * mi) / diffused_var(abar, vi))
                    .collect()
            }
            ScoreModel::Gmm { w, mu, var } => {
                let m = abar.sqrt();
                let logs: Vec<f64> = w
                    .iter()
                    .zip(mu.iter().zip(var))
                    .map(|(wk, (mk, vk))| wk.ln() + gaussian_log_pdf(x, mk, vk, abar))
                    .collect();
                let norm = log_sum_exp(&logs);
                let mut out = vec![0.0; x.len()];
                for (lk, (mk, vk)) in logs.iter().zip(mu.iter().zip(var)) {
                    let r = (lk - norm).exp();
                    for (o, (&xi, (&mi, &vi))) in out.iter_mut().zip(x.iter().zip(mk.iter().zip(vk))) {
                        *o -= r * (xi - m * mi) / diffused_var(abar, vi);
                    }
                }
                out
            }
            ScoreModel::Mlp(net) => net.forward(x, s),
        };
        let out = StateVector::new(out);
        if !out.is_finite() {
            return Err(Error::Numeric(format!("score at s={s} is not finite")));
        }
        Ok(out)
    }

    /// Closed-form `log p_s(x)`; only the analytic variants have one.
    pub fn log_density(&self, schedule: &NoiseSchedule, x: &[f64], s: f64) -> Result<f64> {
        self.check_input(x)?;
        let abar = schedule.alpha_bar(s)?;
        match self {
            ScoreModel::Gaussian { mu, var } => Ok(gaussian_log_pdf(x, mu, var, abar)),
            ScoreModel::Gmm { w, mu, var } => {
                let logs: Vec<f64> = w
                    .iter()
                    .zip(mu.iter().zip(var))
                    .map(|(wk, (mk, vk))| wk.ln() + gaussian_log_pdf(x, mk, vk, abar))
                    .collect();
                Ok(log_sum_exp(&logs))
            }
            ScoreModel::Mlp(_) => Err(Error::Unsupported(
                "mlp score models have no closed-form density".into(),
            )),
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("score input is not finite".into()));
        }
        Ok(())
    }
}

/// Convert a score into the matching noise prediction, `eps = -sqrt(1 - abar) * score`.
///
/// `abar >= 1` is accepted and yields the zero vector.
pub fn eps_from_score(score: &[f64], abar: f64) -> Result<StateVector> {
    if abar.is_nan() || abar <= 0.0 {
        return Err(Error::Domain(format!("alpha_bar {abar} must be positive")));
    }
    if abar >= 1.0 {
        return Ok(StateVector::zeros(score.len()));
    }
    let k = (1.0 - abar).sqrt();
    Ok(score.iter().map(|v| -k * v).collect::<Vec<_>>().into())
}

fn check_params(mu: &[f64], var: &[f64], suffix: &str) -> Result<()> {
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(Error::config(format!("mu{suffix}"), "non-finite mean"));
    }
    if var.iter().any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::config(format!("var{suffix}"), "variances must be positive"));
    }
    Ok(())
}

fn diffused_var(abar: f64, v: f64) -> f64 {
    abar * v + (1.0 - abar)
}

fn gaussian_log_pdf(x: &[f64], mu: &[f64], var: &[f64], abar: f64) -> f64 {
    let m = abar.sqrt();
    x.iter()
        .zip(mu.iter().zip(var))
        .map(|(&xi, (&mi, &vi))| {
            let sig2 = diffused_var(abar, vi);
            let r = xi - m * mi;
            -0.5 * (2.0 * PI * sig2).ln() - r * r / (2.0 * sig2)
        })
        .sum()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
