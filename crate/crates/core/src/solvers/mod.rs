//! Fine-grid discretization, evaluation metering and the step propagators
//! (Euler, Heun, DDIM) used in both the fine and the coarse role.

mod discretization;
mod meter;
mod propagator;

pub use discretization::Discretization;
pub use meter::{EvalMeter, Tick};
pub use propagator::{Propagator, Resolution, SolverKind};
