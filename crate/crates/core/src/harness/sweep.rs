use std::io::Write;

use serde::Serialize;

use super::config::RunConfig;
use super::run::execute;

/// One sweep CSV row. Columns appear in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub mode: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub blocks: Option<usize>,
    pub solver: String,
    pub iters: Option<usize>,
    pub converged: Option<bool>,
    pub eff_serial_evals: Option<u64>,
    pub total_evals: Option<u64>,
    pub final_residual: Option<f64>,
    pub checksum: Option<String>,
    pub error: Option<String>,
}

pub const SWEEP_COLUMNS: [&str; 11] = [
    "mode",
    "N",
    "blocks",
    "solver",
    "iters",
    "converged",
    "eff_serial_evals",
    "total_evals",
    "final_residual",
    "checksum",
    "error",
];

/// Run each config in order. Compare configs contribute one row per mode; a
/// failed config contributes a single row carrying its error.
pub fn sweep(configs: &[RunConfig]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for cfg in configs {
        match execute(cfg) {
            Ok(report) => rows.extend(report.runs.iter().map(|run| SweepRow {
                mode: run.report.mode.to_string(),
                n: cfg.steps,
                blocks: Some(report.n_blocks),
                solver: cfg.solver.to_string(),
                iters: Some(run.report.iters),
                converged: Some(run.report.converged),
                eff_serial_evals: Some(run.report.eff_serial_evals),
                total_evals: Some(run.report.total_evals),
                final_residual: run.report.final_residual(),
                checksum: Some(run.checksum.clone()),
                error: None,
            })),
            Err(e) => rows.push(SweepRow {
                mode: cfg.mode.to_string(),
                n: cfg.steps,
                blocks: cfg.blocks,
                solver: cfg.solver.to_string(),
                iters: None,
                converged: None,
                eff_serial_evals: None,
                total_evals: None,
                final_residual: None,
                checksum: None,
                error: Some(e.to_string()),
            }),
        }
    }
    rows
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::RunMode;

    fn csv_text(rows: &[SweepRow]) -> String {
        let mut buf = Vec::new();
        write_sweep_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_sweep_is_header_only() {
        assert_eq!(
            csv_text(&sweep(&[])),
            "mode,N,blocks,solver,iters,converged,eff_serial_evals,total_evals,final_residual,checksum,error\n"
        );
    }

    #[test]
    fn seeds_change_checksums_not_counters() {
        let a = RunConfig {
            tau: 0.0,
            max_iters: Some(2),
            ..RunConfig::default()
        };
        let b = RunConfig { seed: 1, ..a.clone() };
        let rows = sweep(&[a, b]);
        assert_eq!(rows.len(), 2);
        let counters = |r: &SweepRow| (r.iters, r.eff_serial_evals, r.total_evals);
        assert_eq!(counters(&rows[0]), counters(&rows[1]));
        assert_ne!(rows[0].checksum, rows[1].checksum);
    }

    #[test]
    fn failures_do_not_stop_the_sweep() {
        let bad = RunConfig {
            blocks: Some(1000),
            ..RunConfig::default()
        };
        let good = RunConfig {
            mode: RunMode::Sequential,
            ..RunConfig::default()
        };
        let rows = sweep(&[bad, good]);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].error.as_deref().unwrap().contains("blocks"));
        assert!(rows[1].error.is_none());
        let text = csv_text(&rows);
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("srds,64,1000,ddim,,,,,,,"));
    }

    #[test]
    fn pipelined_with_full_budget_costs_n() {
        for n in [16, 64, 256] {
            let cfg = RunConfig {
                steps: n,
                tau: 0.0,
                mode: RunMode::SrdsPipelined,
                ..RunConfig::default()
            };
            let rows = sweep(&[cfg]);
            assert_eq!(rows[0].eff_serial_evals, Some(n as u64), "N={n}");
        }
    }
}
