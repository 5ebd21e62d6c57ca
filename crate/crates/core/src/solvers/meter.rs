use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

/// Evaluations attributed to one task, stamped with its simulated start slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tick {
    pub task: usize,
    pub slot: u64,
    pub evals: u64,
}

/// Counts model evaluations. Increments are atomic, so concurrent solvers may
/// share one meter; the total only ever grows.
#[derive(Debug, Default)]
pub struct EvalMeter {
    total: AtomicU64,
    ticks: Mutex<Vec<Tick>>,
}

impl EvalMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tick(&self, evals: u64) {
        self.total.fetch_add(evals, Ordering::Relaxed);
    }

    pub fn total(&self) -> u64 {
        self.total.load(Ordering::Relaxed)
    }

    /// Fold a task-local meter into this one after the task has joined.
    pub fn absorb(&self, task: usize, slot: u64, local: &EvalMeter) {
        let evals = local.total();
        self.tick(evals);
        self.ticks
            .lock()
            .expect("tick stream poisoned")
            .push(Tick { task, slot, evals });
    }

    pub fn ticks(&self) -> Vec<Tick> {
        self.ticks.lock().expect("tick stream poisoned").clone()
    }
}
