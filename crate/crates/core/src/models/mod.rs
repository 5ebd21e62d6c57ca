//! Score models, the VP noise schedule and the probability-flow drift.
//!
//! Sampling runs on the progress index `u in [0, 1]`: `u = 0` is the Gaussian
//! prior and `u = 1` is the data end. Diffusion time is `s = 1 - u`; only the
//! schedule and the score models see `s` directly.

mod field;
mod mlp;
mod schedule;
mod score;

pub use field::{Diffusion, Field, LinearField};
pub use mlp::{Activation, Layer, Mlp};
pub use schedule::{diffusion_time, NoiseSchedule};
pub use score::{eps_from_score, ScoreModel};
