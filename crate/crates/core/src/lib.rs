//! Parallel-in-time diffusion sampling.
//!
//! A probability-flow ODE is split into blocks. A cheap coarse solver
//! initialises every block boundary, fine solves run on all blocks at once, and
//! a sequential predictor-corrector sweep repairs the boundaries. Iterating
//! converges to the sequential fine-grid solution, usually well before the
//! worst case. The [`pipeline`] module overlaps consecutive iterations.

pub mod error;
pub mod harness;
pub mod models;
pub mod parareal;
pub mod pipeline;
pub mod solvers;
pub mod state;

pub use error::{Error, Result};
pub use state::StateVector;
