use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::Discretization;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    /// The initial noise sample; free and available at time zero.
    Source,
    Coarse,
    Fine,
    Combine,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Source => "source",
            TaskKind::Coarse => "coarse",
            TaskKind::Fine => "fine",
            TaskKind::Combine => "combine",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a task reads its operands from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Inputs {
    None,
    /// Propagate the state produced by this node across the task's block.
    State(usize),
    /// `fine + (cur - prev)`; `cur == prev` when the coarse input is already final.
    Combine { fine: usize, cur: usize, prev: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskNode {
    pub id: usize,
    pub kind: TaskKind,
    /// Block in `1..=n_blocks`, 0 for the source.
    pub block: usize,
    /// Refinement iteration, 0 for the source and the coarse initialisation.
    pub iter: usize,
    pub deps: Vec<usize>,
    pub inputs: Inputs,
    /// Model evaluations the task performs; combine and source are free.
    pub cost: u64,
}

/// Dependency graph of a pipelined run with a fixed iteration budget.
///
/// Boundary state `x_i^p` (block `i`, iteration `p`) is produced by the source
/// for `i = 0`, by the initial coarse solve for `p = 0`, and by `combine(i, p)`
/// otherwise. Once `p >= i` that state no longer changes, so iteration `p` only
/// schedules fine solves for blocks `i >= p` and coarse solves for blocks
/// `i > p`; `combine(p, p)` reuses the previous coarse value on both sides of
/// the correction. Node ids are a topological order.
#[derive(Debug, Clone, Serialize)]
pub struct TaskGraph {
    nodes: Vec<TaskNode>,
    n_blocks: usize,
    max_iters: usize,
    #[serde(skip)]
    state_ids: Vec<Vec<Option<usize>>>,
    #[serde(skip)]
    coarse_ids: Vec<Vec<Option<usize>>>,
}

/// Graph under unit evaluation cost: a fine task costs its block width, a coarse task 1.
pub fn build_task_graph(disc: &Discretization, max_iters: usize) -> Result<TaskGraph> {
    TaskGraph::weighted(
        disc,
        max_iters,
        |i| {
            let (s, e) = disc.block_span(i);
            (e - s) as u64
        },
        |_| 1,
    )
}

impl TaskGraph {
    /// Build with explicit per-block costs. `max_iters` is clamped to the block
    /// count, past which no state changes.
    pub fn weighted(
        disc: &Discretization,
        max_iters: usize,
        fine_cost: impl Fn(usize) -> u64,
        coarse_cost: impl Fn(usize) -> u64,
    ) -> Result<TaskGraph> {
        if max_iters == 0 {
            return Err(Error::config("max_iters", "must be at least 1"));
        }
        let b = disc.n_blocks();
        let iters = max_iters.min(b);
        let mut g = TaskGraph {
            nodes: Vec::new(),
            n_blocks: b,
            max_iters: iters,
            state_ids: vec![vec![None; iters + 1]; b + 1],
            coarse_ids: vec![vec![None; iters + 1]; b + 1],
        };
        let source = g.push(TaskKind::Source, 0, 0, Inputs::None, 0);
        for p in 0..=iters {
            g.state_ids[0][p] = Some(source);
        }
        for i in 1..=b {
            let from = g.state(i - 1, 0);
            let id = g.push(TaskKind::Coarse, i, 0, Inputs::State(from), coarse_cost(i));
            g.coarse_ids[i][0] = Some(id);
            g.state_ids[i][0] = Some(id);
        }
        for p in 1..=iters {
            // final prefix: x_i^p is x_i^i for i < p
            for i in 1..p {
                g.state_ids[i][p] = g.state_ids[i][i];
            }
            for i in p..=b {
                let fine = g.push(
                    TaskKind::Fine,
                    i,
                    p,
                    Inputs::State(g.state(i - 1, p - 1)),
                    fine_cost(i),
                );
                let prev = g.coarse_ids[i][p - 1].expect("coarse value from the previous iteration");
                let cur = if i == p {
                    prev
                } else {
                    let id = g.push(TaskKind::Coarse, i, p, Inputs::State(g.state(i - 1, p)), coarse_cost(i));
                    g.coarse_ids[i][p] = Some(id);
                    id
                };
                if i == p {
                    g.coarse_ids[i][p] = Some(prev);
                }
                let id = g.push(TaskKind::Combine, i, p, Inputs::Combine { fine, cur, prev }, 0);
                g.state_ids[i][p] = Some(id);
            }
        }
        Ok(g)
    }

    fn push(&mut self, kind: TaskKind, block: usize, iter: usize, inputs: Inputs, cost: u64) -> usize {
        let id = self.nodes.len();
        let mut deps = match inputs {
            Inputs::None => vec![],
            Inputs::State(s) => vec![s],
            Inputs::Combine { fine, cur, prev } => vec![fine, cur, prev],
        };
        deps.sort_unstable();
        deps.dedup();
        self.nodes.push(TaskNode {
            id,
            kind,
            block,
            iter,
            deps,
            inputs,
            cost,
        });
        id
    }

    fn state(&self, block: usize, iter: usize) -> usize {
        self.state_ids[block][iter].expect("state node exists")
    }

    pub fn nodes(&self) -> &[TaskNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TaskNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    /// Iteration budget after clamping.
    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    /// Node producing boundary state `x_block^iter`.
    pub fn state_node(&self, block: usize, iter: usize) -> usize {
        self.state(block, iter)
    }

    /// Node producing the final boundary state of iteration `iter`.
    pub fn final_node(&self, iter: usize) -> usize {
        self.state(self.n_blocks, iter)
    }

    pub fn count(&self, kind: TaskKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    pub fn dependents(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for node in &self.nodes {
            for &d in &node.deps {
                out[d].push(node.id);
            }
        }
        out
    }

    /// Kahn's algorithm; `None` if the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indegree: Vec<usize> = self.nodes.iter().map(|n| n.deps.len()).collect();
        let dependents = self.dependents();
        let mut queue: VecDeque<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &dependents[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        (order.len() == self.nodes.len()).then_some(order)
    }

    pub fn roots(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.deps.is_empty()).map(|n| n.id).collect()
    }
}
