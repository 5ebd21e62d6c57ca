//! Pipelined refinement: the task graph, a simulated unit-cost clock and a
//! threaded executor that overlaps consecutive iterations.

mod clock;
mod executor;
mod gantt;
mod graph;

pub use clock::{peak_overlap, simulate_schedule, ClockTrace, Workers};
pub use executor::{pipelined_srds_run, pipelined_srds_sample, PipelineOutcome};
pub use gantt::{gantt_rows, write_gantt_csv, GanttRow};
pub use graph::{build_task_graph, Inputs, TaskGraph, TaskKind, TaskNode};
