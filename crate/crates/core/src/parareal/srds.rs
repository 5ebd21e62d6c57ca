use rayon::prelude::*;

use super::report::{ConvergenceConfig, Mode, SolveReport};
use crate::error::{Error, Phase, Result};
use crate::solvers::{Discretization, EvalMeter, Propagator};
use crate::state::{mean_abs_diff, StateVector};

/// Running trajectory at the block boundaries for one refinement iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTrajectory {
    /// `states[i]` is the estimate at boundary `i`, `0..=n_blocks`.
    pub states: Vec<StateVector>,
    pub iter: usize,
    /// Coarse outputs from the previous sweep, `prev_coarse[i - 1]` for block `i`.
    pub prev_coarse: Vec<StateVector>,
}

impl BlockTrajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

/// Predictor-corrector combination `fine + (coarse_new - coarse_old)`.
///
/// Both execution modes produce every boundary state through this function so
/// their results agree bit for bit. When the two coarse values are equal the
/// correction is exactly zero and the fine value passes through.
pub fn combine(fine: &StateVector, coarse_new: &StateVector, coarse_old: &StateVector) -> StateVector {
    fine.iter()
        .zip(coarse_new.iter().zip(coarse_old.iter()))
        .map(|(y, (c, p))| y + (c - p))
        .collect::<Vec<_>>()
        .into()
}

/// Mean absolute change below `tau`. `tau = 0` never converges.
pub fn check_convergence(prev_final: &[f64], cur_final: &[f64], cfg: &ConvergenceConfig) -> bool {
    mean_abs_diff(prev_final, cur_final) < cfg.tau
}

/// One coarse step per block from the initial state.
pub fn init_coarse(
    coarse: &Propagator<'_>,
    x0: &StateVector,
    disc: &Discretization,
    meter: &EvalMeter,
) -> Result<BlockTrajectory> {
    x0.ensure_dim(coarse.dim())?;
    if !x0.is_finite() {
        return Err(Error::Numeric("initial state is not finite".into()));
    }
    let mut states = Vec::with_capacity(disc.n_blocks() + 1);
    states.push(x0.clone());
    let mut prev_coarse = Vec::with_capacity(disc.n_blocks());
    for i in 1..=disc.n_blocks() {
        let next = coarse
            .solve_block(&states[i - 1], i, disc, meter)
            .map_err(|e| e.in_block(i, 0, Phase::Init))?;
        prev_coarse.push(next.clone());
        states.push(next);
    }
    Ok(BlockTrajectory {
        states,
        iter: 0,
        prev_coarse,
    })
}

pub(crate) enum FineExec {
    Serial,
    Pool(rayon::ThreadPool),
}

impl FineExec {
    pub(crate) fn new(workers: usize) -> Result<Self> {
        if workers <= 1 {
            return Ok(FineExec::Serial);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map(FineExec::Pool)
            .map_err(|e| Error::config("workers", e.to_string()))
    }
}

/// One refinement: parallel fine solves from the previous iterate, then a
/// sequential coarse sweep applying the predictor-corrector update.
pub fn refine(
    fine: &Propagator<'_>,
    coarse: &Propagator<'_>,
    traj: &BlockTrajectory,
    disc: &Discretization,
    meter: &EvalMeter,
    workers: usize,
) -> Result<BlockTrajectory> {
    refine_with(fine, coarse, traj, disc, meter, &FineExec::new(workers)?)
}

pub(crate) fn refine_with(
    fine: &Propagator<'_>,
    coarse: &Propagator<'_>,
    traj: &BlockTrajectory,
    disc: &Discretization,
    meter: &EvalMeter,
    exec: &FineExec,
) -> Result<BlockTrajectory> {
    let n_blocks = disc.n_blocks();
    if traj.states.len() != n_blocks + 1 || traj.prev_coarse.len() != n_blocks {
        return Err(Error::Index(format!(
            "trajectory has {} states for {n_blocks} blocks",
            traj.states.len()
        )));
    }
    let p = traj.iter + 1;

    let fine_solve = |i: usize| -> Result<StateVector> {
        let local = EvalMeter::new();
        let y = fine
            .solve_block(&traj.states[i - 1], i, disc, &local)
            .map_err(|e| e.in_block(i, p, Phase::Fine))?;
        meter.absorb(i, p as u64, &local);
        Ok(y)
    };
    // results land in block order whatever the worker interleaving
    let fine_out: Vec<Result<StateVector>> = match exec {
        FineExec::Serial => (1..=n_blocks).map(fine_solve).collect(),
        FineExec::Pool(pool) => pool.install(|| (1..=n_blocks).into_par_iter().map(fine_solve).collect()),
    };
    let fine_out = fine_out.into_iter().collect::<Result<Vec<_>>>()?;

    let mut states = Vec::with_capacity(n_blocks + 1);
    states.push(traj.states[0].clone());
    let mut prev_coarse = Vec::with_capacity(n_blocks);
    for i in 1..=n_blocks {
        let cur = coarse
            .solve_block(&states[i - 1], i, disc, meter)
            .map_err(|e| e.in_block(i, p, Phase::Coarse))?;
        let next = combine(&fine_out[i - 1], &cur, &traj.prev_coarse[i - 1]);
        if !next.is_finite() {
            return Err(Error::Numeric("combined state is not finite".into()).in_block(i, p, Phase::Combine));
        }
        states.push(next);
        prev_coarse.push(cur);
    }
    Ok(BlockTrajectory {
        states,
        iter: p,
        prev_coarse,
    })
}

/// Effective serial evaluations of the batched (non-pipelined) schedule after
/// `iters` refinements: the coarse initialisation, then per iteration the widest
/// fine solve (blocks run concurrently) plus a full sequential coarse sweep.
pub fn vanilla_eff_serial(fine: &Propagator<'_>, coarse: &Propagator<'_>, disc: &Discretization, iters: usize) -> u64 {
    let blocks = 1..=disc.n_blocks();
    let sweep: u64 = blocks.clone().map(|i| coarse.block_cost(i, disc)).sum();
    let widest = blocks.map(|i| fine.block_cost(i, disc)).max().unwrap_or(0);
    sweep + iters as u64 * (widest + sweep)
}

/// Self-refining sampler: coarse initialisation, then refine until the final
/// state stops moving by more than `tau` or the iteration cap is reached.
///
/// Returns the final state of the last completed iteration.
pub fn srds_sample(
    fine: &Propagator<'_>,
    coarse: &Propagator<'_>,
    x0: &StateVector,
    disc: &Discretization,
    cfg: &ConvergenceConfig,
    workers: usize,
) -> Result<(StateVector, SolveReport)> {
    srds_trace(fine, coarse, x0, disc, cfg, workers).map(|(traj, report)| (traj.final_state().clone(), report))
}

/// As [`srds_sample`], returning the whole last trajectory.
pub fn srds_trace(
    fine: &Propagator<'_>,
    coarse: &Propagator<'_>,
    x0: &StateVector,
    disc: &Discretization,
    cfg: &ConvergenceConfig,
    workers: usize,
) -> Result<(BlockTrajectory, SolveReport)> {
    let meter = EvalMeter::new();
    let exec = FineExec::new(workers)?;
    let cap = cfg.iteration_cap(disc.n_blocks());
    let mut traj = init_coarse(coarse, x0, disc, &meter)?;
    let mut residuals = Vec::with_capacity(cap);
    let mut converged = false;
    while traj.iter < cap {
        let next = refine_with(fine, coarse, &traj, disc, &meter, &exec)?;
        residuals.push(mean_abs_diff(traj.final_state(), next.final_state()));
        converged = check_convergence(traj.final_state(), next.final_state(), cfg);
        traj = next;
        if converged {
            break;
        }
    }
    let report = SolveReport {
        mode: Mode::Srds,
        total_evals: meter.total(),
        eff_serial_evals: vanilla_eff_serial(fine, coarse, disc, traj.iter),
        iters: traj.iter,
        residuals,
        converged,
    };
    Ok((traj, report))
}

/// Plain left-to-right solve over the whole fine grid.
pub fn sequential_sample(
    fine: &Propagator<'_>,
    x0: &StateVector,
    disc: &Discretization,
) -> Result<(StateVector, SolveReport)> {
    let meter = EvalMeter::new();
    let n = disc.n_fine();
    let out = fine.propagate(x0, 0, n, n, disc, &meter)?;
    let evals = meter.total();
    Ok((
        out,
        SolveReport {
            mode: Mode::Sequential,
            total_evals: evals,
            eff_serial_evals: evals,
            iters: 0,
            residuals: Vec::new(),
            converged: true,
        },
    ))
}
