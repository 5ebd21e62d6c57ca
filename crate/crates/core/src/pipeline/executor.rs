use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::Arc;

use crossbeam_channel::unbounded;

use super::clock::{simulate_schedule, ClockTrace, Workers};
use super::graph::{Inputs, TaskGraph, TaskKind};
use crate::error::{Error, Phase, Result};
use crate::parareal::{combine, ConvergenceConfig, Mode, SolveReport};
use crate::solvers::{Discretization, EvalMeter, Propagator};
use crate::state::{mean_abs_diff, StateVector};

/// Everything a pipelined run produced, including the planned schedule.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub state: StateVector,
    pub report: SolveReport,
    pub graph: TaskGraph,
    /// Unbounded-worker schedule of the full graph.
    pub plan: ClockTrace,
    /// Tasks that ran; the rest were cancelled after convergence.
    pub executed: Vec<bool>,
}

struct Job {
    id: usize,
    kind: TaskKind,
    block: usize,
    iter: usize,
    input: Arc<StateVector>,
}

struct Done {
    id: usize,
    result: Result<StateVector>,
    meter: EvalMeter,
}

/// Pipelined sampler. See [`pipelined_srds_run`].
pub fn pipelined_srds_sample(
    fine: &Propagator<'_>,
    coarse: &Propagator<'_>,
    x0: &StateVector,
    disc: &Discretization,
    cfg: &ConvergenceConfig,
    workers: usize,
) -> Result<(StateVector, SolveReport)> {
    pipelined_srds_run(fine, coarse, x0, disc, cfg, workers).map(|o| (o.state, o.report))
}

/// Execute the refinement task graph on a worker pool, starting every fine and
/// coarse solve as soon as its input state exists.
///
/// Counters follow the unbounded-worker unit-cost clock, so they do not depend
/// on `workers` or thread timing: a task runs if its planned start precedes the
/// planned time of the convergence check that stops the run, and the effective
/// serial count is the planned finish of the returned state. Every state is
/// produced by [`combine`] with the same operands as the batched sampler, so
/// results are bit-identical to it for the same iteration count.
pub fn pipelined_srds_run(
    fine: &Propagator<'_>,
    coarse: &Propagator<'_>,
    x0: &StateVector,
    disc: &Discretization,
    cfg: &ConvergenceConfig,
    workers: usize,
) -> Result<PipelineOutcome> {
    x0.ensure_dim(fine.dim())?;
    if !x0.is_finite() {
        return Err(Error::Numeric("initial state is not finite".into()));
    }
    let cap = cfg.iteration_cap(disc.n_blocks());
    let graph = TaskGraph::weighted(
        disc,
        cap,
        |i| fine.block_cost(i, disc),
        |i| coarse.block_cost(i, disc),
    )?;
    let plan = simulate_schedule(&graph, Workers::Unbounded);
    let check_at: Vec<u64> = (0..=cap).map(|p| plan.end[graph.final_node(p)]).collect();

    let n = graph.len();
    let dependents = graph.dependents();
    let mut remaining: Vec<usize> = graph.nodes().iter().map(|node| node.deps.len()).collect();
    let mut values: Vec<Option<Arc<StateVector>>> = vec![None; n];
    let mut executed = vec![false; n];
    let meter = EvalMeter::new();

    let key = |id: usize| {
        let node = graph.node(id);
        Reverse((plan.start[id], node.iter, node.block, node.kind, id))
    };
    let mut ready: BinaryHeap<_> = graph.roots().into_iter().map(key).collect();
    let mut held: Vec<usize> = Vec::new();

    let mut next_check = 1usize;
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut failure: Option<Error> = None;

    std::thread::scope(|scope| {
        let (job_tx, job_rx) = unbounded::<Job>();
        let (done_tx, done_rx) = unbounded::<Done>();
        for _ in 0..workers.max(1) {
            let job_rx = job_rx.clone();
            let done_tx = done_tx.clone();
            scope.spawn(move || {
                for job in job_rx {
                    let local = EvalMeter::new();
                    let (solver, phase) = match job.kind {
                        TaskKind::Fine => (fine, Phase::Fine),
                        _ => (coarse, if job.iter == 0 { Phase::Init } else { Phase::Coarse }),
                    };
                    let result = solver
                        .solve_block(&job.input, job.block, disc, &local)
                        .map_err(|e| e.in_block(job.block, job.iter, phase));
                    if done_tx.send(Done { id: job.id, result, meter: local }).is_err() {
                        break;
                    }
                }
            });
        }
        drop(done_tx);

        let mut in_flight = 0usize;
        loop {
            // every task planned before this time may start
            let gate = if converged {
                check_at[next_check - 1]
            } else if next_check <= cap {
                check_at[next_check]
            } else {
                u64::MAX
            };
            ready.extend(held.drain(..).map(key));
            while let Some(Reverse((start, _, _, _, id))) = ready.pop() {
                let node = graph.node(id);
                if failure.is_some() {
                    continue;
                }
                if node.cost == 0 {
                    let value = match node.inputs {
                        Inputs::None => x0.clone(),
                        Inputs::Combine { fine, cur, prev } => {
                            let get = |k: usize| values[k].as_deref().expect("operand computed");
                            let out = combine(get(fine), get(cur), get(prev));
                            if !out.is_finite() {
                                failure = Some(
                                    Error::Numeric("combined state is not finite".into())
                                        .in_block(node.block, node.iter, Phase::Combine),
                                );
                                continue;
                            }
                            out
                        }
                        Inputs::State(_) => unreachable!("solve tasks have positive cost"),
                    };
                    values[id] = Some(Arc::new(value));
                    executed[id] = true;
                    for &w in &dependents[id] {
                        remaining[w] -= 1;
                        if remaining[w] == 0 {
                            ready.push(key(w));
                        }
                    }
                } else if start < gate {
                    let Inputs::State(from) = node.inputs else {
                        unreachable!("costed tasks read one state");
                    };
                    let input = values[from].clone().expect("input computed");
                    executed[id] = true;
                    in_flight += 1;
                    job_tx
                        .send(Job {
                            id,
                            kind: node.kind,
                            block: node.block,
                            iter: node.iter,
                            input,
                        })
                        .expect("workers alive while jobs are pending");
                } else {
                    held.push(id);
                }
            }

            // convergence checks run in iteration order as their states land
            let mut released = false;
            while !converged && failure.is_none() && next_check <= cap {
                let (Some(cur), Some(prev)) = (
                    values[graph.final_node(next_check)].as_ref(),
                    values[graph.final_node(next_check - 1)].as_ref(),
                ) else {
                    break;
                };
                let residual = mean_abs_diff(prev, cur);
                residuals.push(residual);
                converged = residual < cfg.tau;
                next_check += 1;
                released = true;
            }
            if released && !held.is_empty() && failure.is_none() {
                continue;
            }

            if in_flight == 0 {
                break;
            }
            let done = done_rx.recv().expect("a worker holds a pending job");
            in_flight -= 1;
            meter.absorb(done.id, plan.start[done.id], &done.meter);
            match done.result {
                Ok(value) => {
                    values[done.id] = Some(Arc::new(value));
                    for &w in &dependents[done.id] {
                        remaining[w] -= 1;
                        if remaining[w] == 0 {
                            ready.push(key(w));
                        }
                    }
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        drop(job_tx);
    });

    if let Some(e) = failure {
        return Err(e);
    }
    let iters = next_check - 1;
    let state = values[graph.final_node(iters)]
        .as_deref()
        .cloned()
        .expect("final state computed");
    let report = SolveReport {
        mode: Mode::SrdsPipelined,
        total_evals: meter.total(),
        eff_serial_evals: check_at[iters],
        iters,
        residuals,
        converged,
    };
    Ok(PipelineOutcome {
        state,
        report,
        graph,
        plan,
        executed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Diffusion, LinearField, NoiseSchedule, ScoreModel};
    use crate::parareal::srds_sample;
    use crate::solvers::SolverKind;

    #[test]
    fn forced_single_iteration_counts() {
        let field = Diffusion::new(
            ScoreModel::gaussian(vec![0.5, -0.5], vec![0.3, 0.8]).unwrap(),
            NoiseSchedule::default(),
        );
        let fine = Propagator::fine(SolverKind::Ddim, &field).unwrap();
        let coarse = Propagator::coarse(SolverKind::Ddim, &field).unwrap();
        let x0 = StateVector::new(vec![0.1, 0.9]);
        let cfg = ConvergenceConfig::fixed(1).unwrap();
        for (n, eff, total) in [(25, 9, 34), (100, 19, 119), (196, 27, 223)] {
            let disc = Discretization::with_default_blocks(n).unwrap();
            let (_, r) = pipelined_srds_sample(&fine, &coarse, &x0, &disc, &cfg, 4).unwrap();
            assert_eq!((r.eff_serial_evals, r.total_evals, r.iters), (eff, total, 1), "n={n}");
        }
    }

    #[test]
    fn matches_batched_sampler() {
        let lin = LinearField::new(3, -1.0);
        let fine = Propagator::fine(SolverKind::Euler, &lin).unwrap();
        let coarse = Propagator::coarse(SolverKind::Euler, &lin).unwrap();
        let disc = Discretization::new(16, 4).unwrap();
        let x0 = StateVector::new(vec![1.0, -2.0, 0.25]);
        for k in 1..=4 {
            let cfg = ConvergenceConfig::fixed(k).unwrap();
            let (a, ra) = srds_sample(&fine, &coarse, &x0, &disc, &cfg, 1).unwrap();
            let (b, rb) = pipelined_srds_sample(&fine, &coarse, &x0, &disc, &cfg, 3).unwrap();
            assert!(a.bit_eq(&b), "k={k}");
            assert_eq!(ra.residuals, rb.residuals);
            assert_eq!(rb.iters, k);
        }
    }

    #[test]
    fn early_stop_cancels_later_work() {
        let field = Diffusion::new(
            ScoreModel::gaussian(vec![0.0; 4], vec![1.0; 4]).unwrap(),
            NoiseSchedule::default(),
        );
        let fine = Propagator::fine(SolverKind::Euler, &field).unwrap();
        let coarse = Propagator::coarse(SolverKind::Euler, &field).unwrap();
        let disc = Discretization::new(64, 8).unwrap();
        let x0 = StateVector::new(vec![0.3, -0.1, 1.2, 0.0]);
        let cfg = ConvergenceConfig::new(1e-9, None).unwrap();
        let out = pipelined_srds_run(&fine, &coarse, &x0, &disc, &cfg, 4).unwrap();
        assert!(out.report.converged);
        assert_eq!(out.report.iters, 1);
        assert_eq!(out.report.eff_serial_evals, 8 + 8 - 1);
        let cancelled = out.executed.iter().filter(|e| !**e).count();
        assert!(cancelled > 0);
        let executed_cost: u64 = out
            .graph
            .nodes()
            .iter()
            .filter(|n| out.executed[n.id])
            .map(|n| n.cost)
            .sum();
        assert_eq!(executed_cost, out.report.total_evals);
        // speculative work started before the check still counts
        assert!(out.report.total_evals > 8 + 64 + 7);
    }

    #[test]
    fn solver_failure_surfaces_with_context() {
        let lin = LinearField::new(1, 1e308);
        let fine = Propagator::fine(SolverKind::Euler, &lin).unwrap();
        let coarse = Propagator::coarse(SolverKind::Euler, &lin).unwrap();
        let disc = Discretization::new(16, 4).unwrap();
        let x0 = StateVector::new(vec![10.0]);
        let err = pipelined_srds_sample(&fine, &coarse, &x0, &disc, &ConvergenceConfig::fixed(2).unwrap(), 2)
            .unwrap_err();
        assert!(matches!(err, Error::Solve { .. }), "{err}");
        assert_eq!(err.exit_code(), 3);
    }
}
