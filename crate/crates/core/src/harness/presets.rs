use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{Diffusion, Field, LinearField, NoiseSchedule, ScoreModel};

/// Decay rate of the `linear` preset.
pub const LINEAR_RATE: f64 = -1.0;

/// Bundled models, selectable by name on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Diagonal Gaussian with varied means and variances.
    Gaussian,
    /// Two-component diagonal mixture.
    Gmm2,
    /// Standard normal target: the drift vanishes and every sampler returns its input.
    Stationary,
    /// `dx/du = LINEAR_RATE * x`, no score model.
    Linear,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Gaussian, Preset::Gmm2, Preset::Stationary, Preset::Linear];

    pub fn from_name(name: &str) -> Option<Preset> {
        match name {
            "gaussian" => Some(Preset::Gaussian),
            "gmm2" | "gmm-2" => Some(Preset::Gmm2),
            "stationary" => Some(Preset::Stationary),
            "linear" => Some(Preset::Linear),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Gaussian => "gaussian",
            Preset::Gmm2 => "gmm-2",
            Preset::Stationary => "stationary",
            Preset::Linear => "linear",
        }
    }

    pub fn build(self, dim: usize) -> Result<ModelField> {
        if dim == 0 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        let schedule = NoiseSchedule::default();
        let diffusion = |model| Ok(ModelField::Diffusion(Diffusion::new(model, schedule)));
        match self {
            Preset::Gaussian => {
                let mu = (0..dim).map(|k| 0.5 * ((k % 4) as f64 - 1.5)).collect();
                let var = (0..dim).map(|k| if k % 2 == 0 { 0.25 } else { 0.75 }).collect();
                diffusion(ScoreModel::gaussian(mu, var)?)
            }
            Preset::Gmm2 => diffusion(ScoreModel::gmm(
                vec![0.4, 0.6],
                vec![vec![-1.0; dim], vec![1.0; dim]],
                vec![vec![0.3; dim], vec![0.5; dim]],
            )?),
            Preset::Stationary => diffusion(ScoreModel::gaussian(vec![0.0; dim], vec![1.0; dim])?),
            Preset::Linear => Ok(ModelField::Linear(LinearField::new(dim, LINEAR_RATE))),
        }
    }
}

/// A concrete field the samplers can integrate.
#[derive(Debug, Clone)]
pub enum ModelField {
    Diffusion(Diffusion),
    Linear(LinearField),
}

impl ModelField {
    pub fn as_field(&self) -> &dyn Field {
        match self {
            ModelField::Diffusion(d) => d,
            ModelField::Linear(l) => l,
        }
    }
}

/// Resolve a preset name or a model JSON path. `dim` is required for presets and
/// must match the file for loaded models.
pub fn resolve_model(spec: &str, dim: Option<usize>) -> Result<ModelField> {
    if let Some(preset) = Preset::from_name(spec) {
        let dim = dim.ok_or_else(|| Error::config("dim", format!("preset `{spec}` needs a dimension")))?;
        return preset.build(dim);
    }
    let model = ScoreModel::load(Path::new(spec))?;
    if let Some(d) = dim {
        if d != model.dim() {
            return Err(Error::config(
                "dim",
                format!("model file `{spec}` has dimension {}, not {d}", model.dim()),
            ));
        }
    }
    Ok(ModelField::Diffusion(Diffusion::new(model, NoiseSchedule::default())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(Preset::from_name(p.name()), Some(p));
        }
        assert_eq!(Preset::from_name("gmm2"), Some(Preset::Gmm2));
        assert_eq!(Preset::from_name("nope"), None);
    }

    #[test]
    fn presets_have_the_requested_dimension() {
        for p in Preset::ALL {
            assert_eq!(p.build(5).unwrap().as_field().dim(), 5);
        }
        assert!(Preset::Gaussian.build(0).is_err());
    }

    #[test]
    fn stationary_drift_is_zero() {
        let m = Preset::Stationary.build(3).unwrap();
        let d = m.as_field().drift(&[0.4, -1.0, 2.0], 0.3).unwrap();
        assert!(d.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = resolve_model("/nonexistent/model.json", Some(2)).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn preset_needs_dim() {
        assert!(matches!(resolve_model("gaussian", None), Err(Error::Config { .. })));
    }
}
