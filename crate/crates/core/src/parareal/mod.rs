//! Parareal-style self-refining sampling: coarse initialisation, parallel fine
//! solves, a sequential predictor-corrector sweep and the convergence test.

mod blocks;
mod report;
mod srds;

pub use blocks::{iteration_cost, optimal_block_size};
pub use report::{ConvergenceConfig, Mode, SolveReport};
pub use srds::{
    check_convergence, combine, init_coarse, refine, sequential_sample, srds_sample, srds_trace,
    vanilla_eff_serial, BlockTrajectory,
};
