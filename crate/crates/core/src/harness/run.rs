use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::noise::draw_initial_noise;
use crate::error::{Error, Result};
use crate::parareal::{sequential_sample, srds_sample, Mode, SolveReport};
use crate::pipeline::{gantt_rows, pipelined_srds_run, write_gantt_csv, GanttRow};
use crate::solvers::Propagator;
use crate::state::{max_abs_diff, StateVector};

pub const REPORT_SCHEMA: &str = "srds-report/1";

/// Hex SHA-256 of the little-endian IEEE-754 bytes of the state.
pub fn checksum(state: &StateVector) -> String {
    hex::encode(Sha256::digest(state.to_le_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRun {
    #[serde(flatten)]
    pub report: SolveReport,
    pub checksum: String,
    pub final_state: StateVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub a: Mode,
    pub b: Mode,
    pub max_abs: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub config: RunConfig,
    pub n_blocks: usize,
    pub initial_checksum: String,
    pub runs: Vec<ModeRun>,
    /// Pairwise final-state deviations; filled in compare mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deviations: Vec<Deviation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_deviation: Option<f64>,
    pub wall_time_s: f64,
    /// Planned schedule of the pipelined run, cancelled tasks excluded.
    #[serde(skip)]
    pub gantt: Option<Vec<GanttRow>>,
}

impl RunReport {
    pub fn run(&self, mode: Mode) -> Option<&ModeRun> {
        self.runs.iter().find(|r| r.report.mode == mode)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// JSON without the wall-time field; identical configs give identical bytes.
    pub fn reproducible_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serialises");
        value.as_object_mut().expect("report is an object").remove("wall_time_s");
        serde_json::to_string_pretty(&value).expect("report serialises")
    }

    /// Write the report and any requested residual or Gantt CSV files.
    pub fn persist(&self) -> Result<()> {
        if let Some(path) = &self.config.out {
            write_file(path, |w| {
                w.write_all(self.to_json().as_bytes())?;
                w.write_all(b"\n")
            })?;
        }
        if let Some(path) = &self.config.residuals {
            write_file(path, |w| {
                let mut csv = csv::Writer::from_writer(w);
                csv.write_record(["mode", "iter", "residual"])?;
                for run in &self.runs {
                    for (k, r) in run.report.residuals.iter().enumerate() {
                        csv.write_record([run.report.mode.as_str(), &(k + 1).to_string(), &r.to_string()])?;
                    }
                }
                csv.flush()
            })?;
        }
        if let (Some(path), Some(rows)) = (&self.config.gantt, &self.gantt) {
            write_file(path, |w| write_gantt_csv(rows, w).map_err(std::io::Error::other))?;
        }
        Ok(())
    }
}

pub(crate) fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Run the configured sampler(s) without touching the filesystem for output.
pub fn execute(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let started = Instant::now();
    let model = config.build_model()?;
    let field = model.as_field();
    let disc = config.discretization()?;
    let conv = config.convergence()?;
    let fine = Propagator::fine(config.solver, field)?;
    let coarse = Propagator::coarse(config.solver, field)?;
    let x0 = draw_initial_noise(config.seed, field.dim());
    let workers = config.worker_count()?;

    let mut runs = Vec::new();
    let mut gantt = None;
    for mode in config.mode.modes() {
        let (state, report) = match mode {
            Mode::Sequential => sequential_sample(&fine, &x0, &disc)?,
            Mode::Srds => srds_sample(&fine, &coarse, &x0, &disc, &conv, workers)?,
            Mode::SrdsPipelined => {
                let out = pipelined_srds_run(&fine, &coarse, &x0, &disc, &conv, workers)?;
                gantt = Some(gantt_rows(&out.graph, &out.plan, Some(&out.executed)));
                (out.state, out.report)
            }
        };
        runs.push(ModeRun {
            report,
            checksum: checksum(&state),
            final_state: state,
        });
    }

    let mut deviations = Vec::new();
    for (i, a) in runs.iter().enumerate() {
        for b in &runs[..i] {
            deviations.push(Deviation {
                a: a.report.mode,
                b: b.report.mode,
                max_abs: max_abs_diff(&a.final_state, &b.final_state),
            });
        }
    }
    let max_abs_deviation = deviations.iter().map(|d| d.max_abs).reduce(f64::max);

    Ok(RunReport {
        schema: REPORT_SCHEMA.to_string(),
        config: config.clone(),
        n_blocks: disc.n_blocks(),
        initial_checksum: checksum(&x0),
        runs,
        deviations,
        max_abs_deviation,
        wall_time_s: started.elapsed().as_secs_f64(),
        gantt,
    })
}

/// Execute and persist every requested output.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let report = execute(config)?;
    report.persist()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::RunMode;
    use crate::solvers::SolverKind;

    fn compare(model: &str, solver: SolverKind, steps: usize) -> RunConfig {
        RunConfig {
            model: model.into(),
            dim: Some(3),
            solver,
            steps,
            tau: 0.0,
            mode: RunMode::Compare,
            workers: Some(2),
            ..RunConfig::default()
        }
    }

    #[test]
    fn stationary_returns_the_noise() {
        for steps in [1, 9, 30] {
            let report = execute(&compare("stationary", SolverKind::Euler, steps)).unwrap();
            assert_eq!(report.max_abs_deviation, Some(0.0));
            for run in &report.runs {
                assert_eq!(run.checksum, report.initial_checksum);
            }
        }
    }

    #[test]
    fn linear_compare_agrees() {
        let cfg = RunConfig {
            max_iters: Some(4),
            ..compare("linear", SolverKind::Euler, 16)
        };
        let report = execute(&cfg).unwrap();
        let dev = report
            .deviations
            .iter()
            .find(|d| d.a == Mode::Srds && d.b == Mode::Sequential)
            .unwrap();
        assert!(dev.max_abs <= 1e-12, "{}", dev.max_abs);
        assert_eq!(report.deviations.len(), 3);
    }

    #[test]
    fn full_budget_agrees_on_every_preset() {
        for preset in crate::harness::Preset::ALL {
            let solver = if preset == crate::harness::Preset::Linear {
                SolverKind::Heun
            } else {
                SolverKind::Ddim
            };
            let report = execute(&compare(preset.name(), solver, 50)).unwrap();
            let dev = report
                .deviations
                .iter()
                .find(|d| d.a == Mode::Srds && d.b == Mode::Sequential)
                .unwrap();
            assert!(dev.max_abs <= 1e-10, "{}: {}", preset.name(), dev.max_abs);
            for run in &report.runs {
                assert!(run.report.eff_serial_evals <= run.report.total_evals);
            }
        }
    }

    #[test]
    fn forced_single_iteration_counters() {
        let cfg = RunConfig {
            steps: 25,
            tau: 0.0,
            max_iters: Some(1),
            ..RunConfig::default()
        };
        let r = execute(&cfg).unwrap();
        let srds = &r.run(Mode::Srds).unwrap().report;
        assert_eq!((srds.eff_serial_evals, srds.total_evals), (15, 35));
    }

    #[test]
    fn report_is_reproducible() {
        let cfg = compare("gmm-2", SolverKind::Ddim, 36);
        let a = execute(&cfg).unwrap();
        let b = execute(&cfg).unwrap();
        assert_eq!(a.reproducible_json(), b.reproducible_json());
        assert!(a.to_json().contains("\"schema\": \"srds-report/1\""));
        assert!(!a.reproducible_json().contains("wall_time_s"));
    }

    #[test]
    fn checksum_is_sha256_of_le_bytes() {
        let s = StateVector::new(vec![]);
        assert_eq!(
            checksum(&s),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_ne!(checksum(&StateVector::new(vec![0.0])), checksum(&StateVector::new(vec![-0.0])));
    }

    #[test]
    fn persists_requested_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            out: Some(dir.path().join("r.json")),
            residuals: Some(dir.path().join("res.csv")),
            gantt: Some(dir.path().join("g.csv")),
            ..compare("gaussian", SolverKind::Heun, 16)
        };
        run(&cfg).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
        assert_eq!(json["schema"], REPORT_SCHEMA);
        assert_eq!(json["runs"].as_array().unwrap().len(), 3);
        let res = std::fs::read_to_string(dir.path().join("res.csv")).unwrap();
        assert!(res.starts_with("mode,iter,residual\nsrds,1,"));
        let gantt = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
        assert!(gantt.starts_with("task_id,kind,block,iter,start,end\n"));
    }

    #[test]
    fn unwritable_output_is_an_io_error() {
        let cfg = RunConfig {
            out: Some("/nonexistent-dir/r.json".into()),
            ..RunConfig::default()
        };
        assert_eq!(run(&cfg).unwrap_err().exit_code(), 4);
    }
}
