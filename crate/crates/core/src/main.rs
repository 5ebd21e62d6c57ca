use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use srds::harness::{self, Preset, RunConfig, RunMode, RunReport};
use srds::pipeline::{build_task_graph, gantt_rows, simulate_schedule, write_gantt_csv, Workers};
use srds::solvers::{Discretization, SolverKind};
use srds::{Error, Result};

#[derive(Parser)]
#[command(name = "srds", version, about = "Parallel-in-time sampling for probability-flow ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one sampler and report its counters.
    Run(RunArgs),
    /// Run sequential, srds and pipelined srds on the same noise and compare outputs.
    Compare(CommonArgs),
    /// Run the cartesian product of comma-separated options; one CSV row per run.
    Sweep(SweepArgs),
    /// Simulate the pipelined schedule without evaluating a model.
    Schedule(ScheduleArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Preset (gaussian, gmm-2, stationary, linear) or model JSON path.
    #[arg(long, default_value = "gaussian")]
    model: String,
    /// Dimension; presets default to 2.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value = "ddim", value_parser = parse::<SolverKind>)]
    solver: SolverKind,
    /// Fine steps N.
    #[arg(long, default_value_t = 64)]
    steps: usize,
    /// Block count; defaults to the cost-optimal value for N.
    #[arg(long)]
    blocks: Option<usize>,
    /// Convergence tolerance; 0 runs exactly max-iters refinements.
    #[arg(long, default_value_t = 1e-3)]
    tau: f64,
    /// Refinement cap, or `auto` for one per block.
    #[arg(long, default_value = "auto", value_parser = parse_max_iters)]
    max_iters: MaxIters,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the block count.
    #[arg(long)]
    workers: Option<usize>,
    /// Report JSON path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Residual CSV path (mode,iter,residual).
    #[arg(long)]
    residuals: Option<PathBuf>,
    /// Gantt CSV path for the pipelined schedule.
    #[arg(long)]
    gantt: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value = "srds", value_parser = parse::<RunMode>)]
    mode: RunMode,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "gaussian")]
    model: Vec<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "ddim", value_parser = parse::<SolverKind>)]
    solver: Vec<SolverKind>,
    #[arg(long, value_delimiter = ',', default_value = "64")]
    steps: Vec<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    tau: f64,
    #[arg(long, default_value = "auto", value_parser = parse_max_iters)]
    max_iters: MaxIters,
    #[arg(long, value_delimiter = ',', default_value = "compare", value_parser = parse::<RunMode>)]
    mode: Vec<RunMode>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// JSON array of run configs, used instead of the option lists.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long, default_value_t = 64)]
    steps: usize,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, default_value = "auto", value_parser = parse_max_iters)]
    max_iters: MaxIters,
    /// Worker limit; unbounded when omitted.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    gantt: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct MaxIters(Option<usize>);

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_max_iters(s: &str) -> Result<MaxIters, String> {
    if s == "auto" {
        return Ok(MaxIters(None));
    }
    s.parse()
        .map(|k| MaxIters(Some(k)))
        .map_err(|_| format!("expected a positive integer or `auto`, got `{s}`"))
}

fn default_dim(model: &str, dim: Option<usize>) -> Option<usize> {
    dim.or_else(|| Preset::from_name(model).map(|_| 2))
}

impl CommonArgs {
    fn into_config(self, mode: RunMode) -> RunConfig {
        RunConfig {
            dim: default_dim(&self.model, self.dim),
            model: self.model,
            solver: self.solver,
            steps: self.steps,
            blocks: self.blocks,
            tau: self.tau,
            max_iters: self.max_iters.0,
            mode,
            seed: self.seed,
            workers: self.workers,
            out: self.out,
            residuals: self.residuals,
            gantt: self.gantt,
        }
    }
}

impl SweepArgs {
    fn configs(&self) -> Result<Vec<RunConfig>> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            return serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                message: e.to_string(),
            });
        }
        let mut out = Vec::new();
        for model in &self.model {
            for &solver in &self.solver {
                for &steps in &self.steps {
                    for &mode in &self.mode {
                        for &seed in &self.seed {
                            out.push(RunConfig {
                                model: model.clone(),
                                dim: default_dim(model, self.dim),
                                solver,
                                steps,
                                blocks: self.blocks,
                                tau: self.tau,
                                max_iters: self.max_iters.0,
                                mode,
                                seed,
                                workers: self.workers,
                                out: None,
                                residuals: None,
                                gantt: None,
                            });
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn print_summary(report: &RunReport) {
    for run in &report.runs {
        let r = &run.report;
        println!(
            "{:<15} iters={} converged={} eff_serial_evals={} total_evals={} checksum={}",
            r.mode, r.iters, r.converged, r.eff_serial_evals, r.total_evals, run.checksum
        );
    }
    for d in &report.deviations {
        println!("max_abs_deviation {} vs {}: {:e}", d.a, d.b, d.max_abs);
    }
}

#[derive(Serialize)]
struct ScheduleSummary {
    steps: usize,
    blocks: usize,
    iters: usize,
    tasks: usize,
    makespan: u64,
    peak_inflight: u64,
    total_evals: u64,
}

fn schedule(args: ScheduleArgs) -> Result<()> {
    let disc = match args.blocks {
        Some(b) => Discretization::new(args.steps, b)?,
        None => Discretization::with_default_blocks(args.steps)?,
    };
    let iters = args.max_iters.0.unwrap_or(disc.n_blocks());
    let graph = build_task_graph(&disc, iters)?;
    let workers = match args.workers {
        Some(0) => return Err(Error::config("workers", "must be at least 1")),
        Some(w) => Workers::Limited(w),
        None => Workers::Unbounded,
    };
    let trace = simulate_schedule(&graph, workers);
    if let Some(path) = &args.gantt {
        let rows = gantt_rows(&graph, &trace, None);
        let file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        write_gantt_csv(&rows, file).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;
    }
    let summary = ScheduleSummary {
        steps: disc.n_fine(),
        blocks: disc.n_blocks(),
        iters: graph.max_iters(),
        tasks: graph.len(),
        makespan: trace.makespan,
        peak_inflight: trace.peak_inflight,
        total_evals: graph.nodes().iter().map(|n| n.cost).sum(),
    };
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serialises"));
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let rows = harness::sweep(&args.configs()?);
    let io_err = |path: &str, e: csv::Error| Error::Io {
        path: path.to_string(),
        source: std::io::Error::other(e),
    };
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?;
            harness::write_sweep_csv(&rows, file).map_err(|e| io_err(&path.display().to_string(), e))
        }
        None => harness::write_sweep_csv(&rows, std::io::stdout().lock()).map_err(|e| io_err("stdout", e)),
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let report = harness::run(&args.common.into_config(args.mode))?;
            print_summary(&report);
            Ok(())
        }
        Command::Compare(args) => {
            let report = harness::run(&args.into_config(RunMode::Compare))?;
            print_summary(&report);
            Ok(())
        }
        Command::Sweep(args) => sweep(args),
        Command::Schedule(args) => schedule(args),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
