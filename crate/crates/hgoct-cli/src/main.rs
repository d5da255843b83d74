//! Batch front end: load a problem (built-in or from a JSON config), run
//! the relaxation optimizer, and emit plot-ready CSV artifacts plus
//! resumable checkpoints.
//!
//! Exit codes: 0 converged, 2 invalid config, 3 numerical failure,
//! 4 iteration cap reached, 5 mixing-parameter underflow.

mod checkpoint;
mod config;
mod expr;
mod output;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use hgoct::optimizer::{optimize_from, OptimizationState, RelaxationConfig, Termination};
use hgoct::problems::ProblemSpec;

use checkpoint::Checkpoint;
use config::RunConfig;
use output::write_run_outputs;

const EXIT_CONVERGED: i32 = 0;
const EXIT_CONFIG: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;
const EXIT_MAX_ITERATIONS: i32 = 4;
const EXIT_K_UNDERFLOW: i32 = 5;

const DEFAULT_MAX_ITERATIONS: usize = 200;
const DEFAULT_OUT_DIR: &str = "hgoct_out";

#[derive(Parser)]
#[command(
    name = "hgoct",
    about = "Spectrally filtered optimal control of quantum harmonic generation",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize a driving field for a built-in or config-defined problem.
    Run(RunArgs),
    /// Continue an interrupted run from a checkpoint file.
    Resume { path: PathBuf },
    /// Check a config file for consistency without running it.
    Validate { path: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// tls | 11ls | hcl | coulomb | file:PATH (JSON run config)
    #[arg(long)]
    problem: String,
    /// Output directory for CSV artifacts and checkpoints.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Convergence tolerance on the relative field change per iteration.
    #[arg(long)]
    tau: Option<f64>,
    /// Initial mixing parameter in (0, 1].
    #[arg(long)]
    k_init: Option<f64>,
    /// Write a checkpoint after every N accepted iterations.
    #[arg(long)]
    checkpoint_every: Option<usize>,
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.downcast_ref::<ExitHint>().map_or(EXIT_CONFIG, |h| h.0)
        }
    };
    std::process::exit(code);
}

/// Marker attached to errors that should not exit with the config code.
#[derive(Debug)]
struct ExitHint(i32);

impl std::fmt::Display for ExitHint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit code {}", self.0)
    }
}

impl std::error::Error for ExitHint {}

fn numerical(e: hgoct::Error) -> anyhow::Error {
    anyhow!(ExitHint(EXIT_NUMERICAL)).context(e.to_string())
}

fn dispatch(cli: Cli) -> Result<i32> {
    check_thread_cap()?;
    match cli.cmd {
        Cmd::Run(args) => run(args),
        Cmd::Resume { path } => resume(&path),
        Cmd::Validate { path } => validate(&path),
    }
}

/// HGOCT_THREADS caps internal data parallelism. The numerical core is
/// currently single-threaded, so any valid cap is honored trivially; the
/// value is still validated so misconfigurations fail loudly.
fn check_thread_cap() -> Result<()> {
    if let Ok(v) = std::env::var("HGOCT_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow!("HGOCT_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err(anyhow!("HGOCT_THREADS must be at least 1"));
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<i32> {
    let mut cfg = RunConfig::from_problem_arg(&args.problem)?;
    if let Some(out) = &args.out {
        cfg.out = Some(out.to_string_lossy().into_owned());
    }
    if let Some(n) = args.max_iterations {
        cfg.max_iterations = Some(n);
    }
    if let Some(tau) = args.tau {
        cfg.tau = Some(tau);
    }
    if let Some(k) = args.k_init {
        cfg.k_init = Some(k);
    }
    if let Some(n) = args.checkpoint_every {
        cfg.checkpoint_every = Some(n);
    }
    let problem = cfg.build_problem()?;
    execute(&cfg, &problem, None)
}

fn resume(path: &Path) -> Result<i32> {
    let cp = Checkpoint::load(path)?;
    let (cfg, state) = cp.into_state()?;
    let problem = cfg.build_problem()?;
    if state.field_spectrum.len() != problem.tgrid.n_t {
        return Err(anyhow!(
            "checkpoint spectrum has {} bins but the problem grid has {}",
            state.field_spectrum.len(),
            problem.tgrid.n_t
        ));
    }
    execute(&cfg, &problem, Some(state))
}

fn execute(
    cfg: &RunConfig,
    problem: &ProblemSpec<f64>,
    state: Option<OptimizationState<f64>>,
) -> Result<i32> {
    let max_iterations = cfg.max_iterations.unwrap_or(DEFAULT_MAX_ITERATIONS);
    let relax = RelaxationConfig::for_problem(problem, max_iterations);
    let out_dir = PathBuf::from(cfg.out.as_deref().unwrap_or(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;

    let checkpoint_every = cfg.checkpoint_every.unwrap_or(0);
    let checkpoint_path = out_dir.join("checkpoint.json");
    let mut full_history = state.as_ref().map(|s| s.history.clone()).unwrap_or_default();
    let mut checkpoint_err = None;

    let result = optimize_from(problem, &relax, state, &mut |rec, eps| {
        println!(
            "iter {:4}  J = {:+.10e}  metric = {:.3e}  K = {:.3e}  backtracks = {}",
            rec.index, rec.j.j_total, rec.metric, rec.k_used, rec.backtracks
        );
        full_history.push(*rec);
        if checkpoint_every > 0 && (rec.index + 1) % checkpoint_every == 0 && checkpoint_err.is_none()
        {
            let cp = Checkpoint::capture(cfg, rec.index + 1, rec.k_used, eps, &full_history);
            let stamped = out_dir.join(format!("checkpoint_{:06}.json", rec.index + 1));
            if let Err(e) = cp.save(&stamped).and_then(|()| cp.save(&checkpoint_path)) {
                checkpoint_err = Some(e);
            }
        }
    })
    .map_err(numerical)?;
    if let Some(e) = checkpoint_err {
        return Err(e.context("failed to write checkpoint"));
    }

    if checkpoint_every > 0 {
        let cp = Checkpoint::capture(
            cfg,
            result.history.last().map_or(0, |r| r.index + 1),
            result.final_k,
            &result.field_spectrum,
            &result.history,
        );
        cp.save(&checkpoint_path)?;
    }

    write_run_outputs(&out_dir, problem, &result)?;
    println!(
        "{:?} after {} iterations; J_total = {:+.10e}; outputs in {}",
        result.termination,
        result.history.len(),
        result.final_j.j_total,
        out_dir.display()
    );
    Ok(match result.termination {
        Termination::Converged => EXIT_CONVERGED,
        Termination::MaxIterations => EXIT_MAX_ITERATIONS,
        Termination::KUnderflow => EXIT_K_UNDERFLOW,
    })
}

fn validate(path: &Path) -> Result<i32> {
    let cfg = RunConfig::load(&path.to_string_lossy())?;
    let report = match cfg.build_problem_unvalidated() {
        Ok(problem) => problem.validation_report(),
        Err(e) => vec![format!("{e:#}")],
    };
    if report.is_empty() {
        println!("ok: configuration is consistent");
        Ok(EXIT_CONVERGED)
    } else {
        for line in &report {
            println!("violation: {line}");
        }
        Ok(EXIT_CONFIG)
    }
}
