//! Command-line front end: `optimize`, `compare`, `score` and `gen-data`.
//!
//! Exit status is 0 on success and 2 on any configuration or I/O error;
//! diagnostics go to the error stream, results to stdout or files.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{self, LoadedConfig};
use crate::harness::{emit_detail, emit_traces, run_experiment, single_run_curves, Method};
use crate::market_data::{stats_from_prices, write_prices_csv};
use crate::optimizer::bo_run;
use crate::synthetic::generate_prices;
use crate::{Error, Objective, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 2;

const DEFAULT_TRACE_PATH: &str = "traces.csv";
const DEFAULT_PRICES_PATH: &str = "prices.csv";

#[derive(Debug, Parser)]
#[command(name = "esgbo", version, about = "Bayesian optimization of ESG-constrained Sharpe-ratio portfolios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single Bayesian-optimization run; prints the recommended weights.
    Optimize(Invocation),
    /// Repeated BO vs random search; writes aggregate mean/std curves.
    Compare(CompareArgs),
    /// Prints firm ESG totals and, if weights are given, the portfolio score.
    Score(Invocation),
    /// Writes a synthetic price CSV whose mean returns hit the configured targets.
    GenData(Invocation),
}

#[derive(Debug, Clone, Args)]
pub struct Invocation {
    /// Run-config file (TOML)
    #[arg(short, long)]
    pub config: PathBuf,
    /// Seed for the run, the experiment base seed and data generation
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Dotted-path override, e.g. `run.budget=5`; repeatable
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub inv: Invocation,
    /// Also write per-evaluation detail rows here
    #[arg(long)]
    pub detail: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Optimize(inv) => cmd_optimize(inv, out),
        Command::Compare(args) => cmd_compare(args, out),
        Command::Score(inv) => cmd_score(inv, out),
        Command::GenData(inv) => cmd_gen_data(inv, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let _ = writeln!(err, "  caused by: {s}");
                source = s.source();
            }
            EXIT_ERROR
        }
    }
}

fn load(inv: &Invocation) -> Result<LoadedConfig> {
    let mut cfg = config::load(&inv.config, &inv.overrides)?;
    if let Some(seed) = inv.seed {
        cfg.file.run.seed = seed;
        cfg.file.experiment.base_seed = Some(seed);
        if let Some(g) = cfg.file.gen_data.as_mut() {
            g.seed = seed;
        }
    }
    Ok(cfg)
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn percent_list(weights: &[f64]) -> String {
    let parts: Vec<String> = weights.iter().map(|w| format!("{:.1}%", 100.0 * w)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn cmd_optimize(inv: &Invocation, out: &mut dyn Write) -> Result<()> {
    let cfg = load(inv)?;
    let objective = cfg.portfolio_objective()?;
    let run = cfg.run_config(Objective::dim(&objective))?;
    let trace = bo_run(&objective, &run).map_err(|e| e.source)?;

    for (t, e) in trace.evaluations().iter().enumerate() {
        writeln!(out, "eval {}: fitness={:.6} weights={}", t + 1, e.fitness, percent_list(e.weights.as_slice()))
            .map_err(stdout_err)?;
    }
    writeln!(out, "recommendation:").map_err(stdout_err)?;
    for (name, w) in cfg.asset_names().iter().zip(trace.recommendation().as_slice()) {
        writeln!(out, "  {name}: {:.1}%", 100.0 * w).map_err(stdout_err)?;
    }
    writeln!(out, "fitness: {:.6}", trace.best_fitness()).map_err(stdout_err)?;

    if let Some(path) = &inv.output {
        let curves = single_run_curves(Method::Bo, run.seed, trace);
        emit_detail(&[&curves], run.n_assets, path)?;
    }
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let inv = &args.inv;
    let cfg = load(inv)?;
    let objective = cfg.portfolio_objective()?;
    let experiment = cfg.experiment_config(Objective::dim(&objective))?;
    let curves = run_experiment(&objective, &experiment)?;

    let path = inv.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_TRACE_PATH));
    emit_traces(&curves, &path)?;
    if let Some(detail) = &args.detail {
        emit_detail(&[&curves.bo, &curves.random], experiment.run.n_assets, detail)?;
    }
    for m in curves.methods() {
        writeln!(
            out,
            "{}: final best {:.6} ± {:.6} over {} repetitions ({} failed)",
            m.method.as_str(),
            m.final_mean(),
            m.final_std(),
            m.runs.len(),
            m.failures.len()
        )
        .map_err(stdout_err)?;
    }
    writeln!(out, "traces written to {}", path.display()).map_err(stdout_err)?;
    Ok(())
}

pub fn cmd_score(inv: &Invocation, out: &mut dyn Write) -> Result<()> {
    let cfg = load(inv)?;
    let totals = cfg.esg_totals()?;
    for t in &totals {
        writeln!(out, "{}: {:.2}", t.firm_name(), t.total()).map_err(stdout_err)?;
    }
    if let Some(weights) = cfg.portfolio_weights()? {
        let score = crate::esg::portfolio_esg(&weights, &totals)?;
        writeln!(out, "portfolio: {score:.2}").map_err(stdout_err)?;
    }
    Ok(())
}

pub fn cmd_gen_data(inv: &Invocation, out: &mut dyn Write) -> Result<()> {
    let cfg = load(inv)?;
    let market = cfg.synthetic_market()?;
    let series = generate_prices(&market)?;
    let path = match (&inv.output, cfg.file.gen_data.as_ref().and_then(|g| g.output.as_ref())) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => cfg.resolve(p),
        (None, None) => PathBuf::from(DEFAULT_PRICES_PATH),
    };
    write_prices_csv(&path, &series)?;

    let stats = stats_from_prices(&series)?;
    writeln!(out, "wrote {} prices per asset to {}", market.days, path.display()).map_err(stdout_err)?;
    writeln!(out, "mean returns:").map_err(stdout_err)?;
    for (name, m) in stats.asset_names().iter().zip(stats.mean_returns()) {
        writeln!(out, "  {name}: {m:.8}").map_err(stdout_err)?;
    }
    writeln!(out, "sample covariance:").map_err(stdout_err)?;
    for row in stats.covariance().to_rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6e}")).collect();
        writeln!(out, "  {}", cells.join(" ")).map_err(stdout_err)?;
    }
    Ok(())
}
