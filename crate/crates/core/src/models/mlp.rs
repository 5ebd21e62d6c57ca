use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    #[serde(alias = "identity", alias = "none")]
    Linear,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Relu => v.max(0.0),
            Activation::Linear => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// Row-major `[out][in]`.
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default = "default_act")]
    pub act: Activation,
}

fn default_act() -> Activation {
    Activation::Linear
}

/// Small dense network used as a file-loaded score model.
///
/// The input is the state with diffusion time `s` appended as one extra feature,
/// so the first layer takes `dims + 1` inputs and the last one emits `dims` outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub dims: usize,
    pub layers: Vec<Layer>,
}

impl Mlp {
    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::config("dims", "must be at least 1"));
        }
        if self.layers.is_empty() {
            return Err(Error::config("layers", "at least one layer is required"));
        }
        let mut width = self.dims + 1;
        for (k, layer) in self.layers.iter().enumerate() {
            if layer.w.is_empty() || layer.w.len() != layer.b.len() {
                return Err(Error::config(
                    format!("layers[{k}]"),
                    "w must have one row per bias entry",
                ));
            }
            if let Some(row) = layer.w.iter().find(|row| row.len() != width) {
                return Err(Error::config(
                    format!("layers[{k}].w"),
                    format!("row of length {} where {width} inputs are expected", row.len()),
                ));
            }
            let finite = layer.b.iter().chain(layer.w.iter().flatten()).all(|v| v.is_finite());
            if !finite {
                return Err(Error::config(format!("layers[{k}]"), "non-finite parameter"));
            }
            width = layer.b.len();
        }
        if width != self.dims {
            return Err(Error::config(
                "layers",
                format!("final layer emits {width} values, expected {}", self.dims),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64], s: f64) -> Vec<f64> {
        let mut h: Vec<f64> = x.iter().copied().chain(std::iter::once(s)).collect();
        for layer in &self.layers {
            h = layer
                .w
                .iter()
                .zip(&layer.b)
                .map(|(row, bias)| {
                    let pre = row.iter().zip(&h).fold(*bias, |acc, (w, v)| acc + w * v);
                    layer.act.apply(pre)
                })
                .collect();
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Mlp {
        Mlp {
            dims: 1,
            layers: vec![
                Layer {
                    w: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                    b: vec![0.0, 0.0],
                    act: Activation::Relu,
                },
                Layer {
                    w: vec![vec![-1.0, 2.0]],
                    b: vec![0.5],
                    act: Activation::Linear,
                },
            ],
        }
    }

    #[test]
    fn forward_by_hand() {
        let net = tiny();
        net.validate().unwrap();
        // relu([-3, 0.25]) = [0, 0.25]; -0 + 0.5 + 0.5
        assert_eq!(net.forward(&[-3.0], 0.25), vec![1.0]);
        // relu([2, 0.5]) = [2, 0.5]; -2 + 1 + 0.5
        assert_eq!(net.forward(&[2.0], 0.5), vec![-0.5]);
    }

    #[test]
    fn rejects_wrong_widths() {
        let mut net = tiny();
        net.layers[0].w[1].push(3.0);
        assert!(net.validate().is_err());
        let mut net = tiny();
        net.layers[1].b.push(0.0);
        net.layers[1].w.push(vec![0.0, 0.0]);
        assert!(net.validate().is_err());
    }

    #[test]
    fn parses_activation_names() {
        let json = r#"{"dims":1,"layers":[{"w":[[0.5,0.1]],"b":[0.0],"act":"tanh"}]}"#;
        let net: Mlp = serde_json::from_str(json).unwrap();
        assert_eq!(net.layers[0].act, Activation::Tanh);
        net.validate().unwrap();
    }
}
