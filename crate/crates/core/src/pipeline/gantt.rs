use std::io::Write;

use serde::Serialize;

use super::clock::ClockTrace;
use super::graph::{TaskGraph, TaskKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GanttRow {
    pub task_id: usize,
    pub kind: TaskKind,
    pub block: usize,
    pub iter: usize,
    pub start: u64,
    pub end: u64,
}

/// One row per task, in id order. Tasks with `keep[id] == false` are skipped.
pub fn gantt_rows(graph: &TaskGraph, trace: &ClockTrace, keep: Option<&[bool]>) -> Vec<GanttRow> {
    graph
        .nodes()
        .iter()
        .filter(|n| keep.is_none_or(|k| k[n.id]))
        .map(|n| GanttRow {
            task_id: n.id,
            kind: n.kind,
            block: n.block,
            iter: n.iter,
            start: trace.start[n.id],
            end: trace.end[n.id],
        })
        .collect()
}

pub fn write_gantt_csv<W: Write>(rows: &[GanttRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{build_task_graph, simulate_schedule, Workers};
    use crate::solvers::Discretization;

    #[test]
    fn csv_layout() {
        let disc = Discretization::new(4, 2).unwrap();
        let g = build_task_graph(&disc, 1).unwrap();
        let trace = simulate_schedule(&g, Workers::Unbounded);
        let rows = gantt_rows(&g, &trace, None);
        assert_eq!(rows.len(), g.len());
        let mut buf = Vec::new();
        write_gantt_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("task_id,kind,block,iter,start,end"));
        assert_eq!(lines.next(), Some("0,source,0,0,0,0"));
        assert_eq!(lines.next(), Some("1,coarse,1,0,0,1"));
    }

    #[test]
    fn mask_filters_rows() {
        let disc = Discretization::new(4, 2).unwrap();
        let g = build_task_graph(&disc, 1).unwrap();
        let trace = simulate_schedule(&g, Workers::Unbounded);
        let mut keep = vec![true; g.len()];
        keep[0] = false;
        let rows = gantt_rows(&g, &trace, Some(&keep));
        assert_eq!(rows.len(), g.len() - 1);
        assert_eq!(rows[0].task_id, 1);
    }
}
