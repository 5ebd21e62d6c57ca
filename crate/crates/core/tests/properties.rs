use proptest::prelude::*;

use srds::harness::{draw_initial_noise, Preset};
use srds::parareal::{combine, iteration_cost, optimal_block_size, sequential_sample, srds_sample, ConvergenceConfig};
use srds::pipeline::{build_task_graph, pipelined_srds_sample, simulate_schedule, Workers};
use srds::solvers::{Discretization, EvalMeter, Propagator, SolverKind};
use srds::state::StateVector;

fn finite_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equal_coarse_values_pass_fine_through(fine in finite_vec(5), coarse in finite_vec(5)) {
        let f = StateVector::new(fine);
        let c = StateVector::new(coarse);
        prop_assert!(combine(&f, &c, &c).bit_eq(&f));
    }

    #[test]
    fn block_size_is_a_cost_minimiser(n in 2usize..5000) {
        let b = optimal_block_size(n).unwrap();
        let best = (1..=n).map(|k| iteration_cost(n, k)).min().unwrap();
        prop_assert_eq!(iteration_cost(n, b), best);
        prop_assert!(Discretization::new(n, b).is_ok());
    }

    #[test]
    fn boundaries_cover_the_grid(n in 1usize..2000, frac in 0.0..1.0f64) {
        let b = 1 + ((n - 1) as f64 * frac) as usize;
        if let Ok(disc) = Discretization::new(n, b) {
            let bounds = disc.boundaries();
            prop_assert_eq!(bounds[0], 0);
            prop_assert_eq!(*bounds.last().unwrap(), n);
            prop_assert!(bounds.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn fine_propagation_folds(split in 1usize..24, seed in any::<u64>()) {
        let model = Preset::Gmm2.build(3).unwrap();
        let fine = Propagator::fine(SolverKind::Heun, model.as_field()).unwrap();
        let disc = Discretization::new(24, 4).unwrap();
        let x0 = draw_initial_noise(seed, 3);
        let meter = EvalMeter::new();
        let whole = fine.propagate(&x0, 0, 24, 24, &disc, &meter).unwrap();
        let mid = fine.propagate(&x0, 0, split, split, &disc, &meter).unwrap();
        let rest = fine.propagate(&mid, split, 24, 24 - split, &disc, &meter).unwrap();
        prop_assert!(whole.bit_eq(&rest));
    }

    #[test]
    fn pipelined_matches_vanilla(n in 2usize..80, k in 1usize..5, workers in 1usize..6, seed in any::<u64>()) {
        let model = Preset::Gaussian.build(2).unwrap();
        let fine = Propagator::fine(SolverKind::Euler, model.as_field()).unwrap();
        let coarse = Propagator::coarse(SolverKind::Euler, model.as_field()).unwrap();
        let disc = Discretization::with_default_blocks(n).unwrap();
        let x0 = draw_initial_noise(seed, 2);
        let cfg = ConvergenceConfig::fixed(k).unwrap();
        let (v, rv) = srds_sample(&fine, &coarse, &x0, &disc, &cfg, workers).unwrap();
        let (p, rp) = pipelined_srds_sample(&fine, &coarse, &x0, &disc, &cfg, workers).unwrap();
        prop_assert!(v.bit_eq(&p));
        prop_assert_eq!(rv.iters, rp.iters);
        prop_assert!(rp.eff_serial_evals <= rv.eff_serial_evals);
        prop_assert!(rv.eff_serial_evals <= rv.total_evals);
        prop_assert!(rp.eff_serial_evals <= rp.total_evals);
    }

    #[test]
    fn full_budget_reproduces_sequential(n in 2usize..100, seed in any::<u64>()) {
        let model = Preset::Gmm2.build(2).unwrap();
        let fine = Propagator::fine(SolverKind::Ddim, model.as_field()).unwrap();
        let coarse = Propagator::coarse(SolverKind::Ddim, model.as_field()).unwrap();
        let disc = Discretization::with_default_blocks(n).unwrap();
        let x0 = draw_initial_noise(seed, 2);
        let (par, r) = srds_sample(&fine, &coarse, &x0, &disc, &ConvergenceConfig::fixed(n).unwrap(), 1).unwrap();
        let (seq, rs) = sequential_sample(&fine, &x0, &disc).unwrap();
        prop_assert!(par.bit_eq(&seq));
        prop_assert_eq!(r.iters, disc.n_blocks());
        prop_assert_eq!(rs.eff_serial_evals, rs.total_evals);
    }

    #[test]
    fn latency_and_memory_on_square_grids(root in 2u64..20, frac in 0.0..1.0f64) {
        let n = (root * root) as usize;
        let p = 1 + ((root - 1) as f64 * frac) as u64;
        let disc = Discretization::with_default_blocks(n).unwrap();
        let g = build_task_graph(&disc, p as usize).unwrap();
        let trace = simulate_schedule(&g, Workers::Unbounded);
        prop_assert_eq!(trace.makespan, root * p + root - p);
        prop_assert!(trace.peak_inflight <= root + 1);
    }

    #[test]
    fn limited_workers_respect_the_limit(n in 2usize..200, workers in 1usize..8) {
        let disc = Discretization::with_default_blocks(n).unwrap();
        let g = build_task_graph(&disc, disc.n_blocks()).unwrap();
        let limited = simulate_schedule(&g, Workers::Limited(workers));
        let free = simulate_schedule(&g, Workers::Unbounded);
        prop_assert!(limited.peak_inflight <= workers as u64);
        prop_assert!(limited.makespan >= free.makespan);
        for node in g.nodes() {
            prop_assert!(node.deps.iter().all(|&d| limited.end[d] <= limited.start[node.id]));
        }
    }
}
