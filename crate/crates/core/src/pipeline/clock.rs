use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::graph::TaskGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Workers {
    Unbounded,
    Limited(usize),
}

/// Simulated schedule: one clock slot per model evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClockTrace {
    pub start: Vec<u64>,
    pub end: Vec<u64>,
    pub makespan: u64,
    /// Most positive-cost tasks running in any one slot.
    pub peak_inflight: u64,
}

impl ClockTrace {
    fn from_times(graph: &TaskGraph, start: Vec<u64>, end: Vec<u64>) -> Self {
        let makespan = end.iter().copied().max().unwrap_or(0);
        let intervals: Vec<(u64, u64)> = graph
            .nodes()
            .iter()
            .filter(|n| n.cost > 0)
            .map(|n| (start[n.id], end[n.id]))
            .collect();
        ClockTrace {
            start,
            end,
            makespan,
            peak_inflight: peak_overlap(&intervals),
        }
    }
}

/// Largest number of half-open `[start, end)` intervals sharing a point.
pub fn peak_overlap(intervals: &[(u64, u64)]) -> u64 {
    let mut events: Vec<(u64, i64)> = Vec::with_capacity(intervals.len() * 2);
    for &(s, e) in intervals {
        if e > s {
            events.push((s, 1));
            events.push((e, -1));
        }
    }
    // at equal times, ends sort before starts
    events.sort_unstable();
    let mut cur = 0i64;
    let mut peak = 0i64;
    for (_, delta) in events {
        cur += delta;
        peak = peak.max(cur);
    }
    peak as u64
}

/// Non-preemptive list scheduling under unit evaluation cost.
///
/// A task becomes ready when all of its dependencies have ended. Ready tasks
/// are taken in (iteration, block, kind, id) order. Free tasks (combine and
/// source) finish the moment they are ready and never occupy a worker.
pub fn simulate_schedule(graph: &TaskGraph, workers: Workers) -> ClockTrace {
    match workers {
        Workers::Unbounded => unbounded(graph),
        Workers::Limited(w) => limited(graph, w.max(1)),
    }
}

fn unbounded(graph: &TaskGraph) -> ClockTrace {
    let n = graph.len();
    let mut start = vec![0u64; n];
    let mut end = vec![0u64; n];
    // ids are a topological order
    for node in graph.nodes() {
        let s = node.deps.iter().map(|&d| end[d]).max().unwrap_or(0);
        start[node.id] = s;
        end[node.id] = s + node.cost;
    }
    ClockTrace::from_times(graph, start, end)
}

fn limited(graph: &TaskGraph, workers: usize) -> ClockTrace {
    let n = graph.len();
    let dependents = graph.dependents();
    let mut remaining: Vec<usize> = graph.nodes().iter().map(|node| node.deps.len()).collect();
    let mut start = vec![0u64; n];
    let mut end = vec![0u64; n];
    let key = |id: usize| {
        let node = graph.node(id);
        Reverse((node.iter, node.block, node.kind, id))
    };
    let mut ready: BinaryHeap<_> = graph.roots().into_iter().map(key).collect();
    let mut running: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut now = 0u64;
    let mut done = 0usize;

    let mut finish = |id: usize, t: u64, ready: &mut BinaryHeap<_>, remaining: &mut Vec<usize>| {
        end[id] = t;
        for &w in &dependents[id] {
            remaining[w] -= 1;
            if remaining[w] == 0 {
                ready.push(key(w));
            }
        }
    };

    while done < n {
        // start everything that fits in this slot; free tasks may unlock more
        let mut deferred = Vec::new();
        while let Some(Reverse((_, _, _, id))) = ready.pop() {
            let cost = graph.node(id).cost;
            if cost == 0 {
                start[id] = now;
                finish(id, now, &mut ready, &mut remaining);
                done += 1;
            } else if running.len() < workers {
                start[id] = now;
                running.push(Reverse((now + cost, id)));
            } else {
                deferred.push(key(id));
            }
        }
        ready.extend(deferred);
        let Some(Reverse((t, _))) = running.peek().copied() else {
            break;
        };
        now = t;
        while let Some(&Reverse((t, id))) = running.peek() {
            if t != now {
                break;
            }
            running.pop();
            finish(id, now, &mut ready, &mut remaining);
            done += 1;
        }
    }
    ClockTrace::from_times(graph, start, end)
}
