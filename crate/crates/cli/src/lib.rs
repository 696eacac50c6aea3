//! Command-line front end: theory queries, tradeoff contours, Monte Carlo
//! sweeps and lemma verification.
//!
//! Exit codes: 0 success, 1 validation error, 2 tolerance failure, 3 runtime
//! error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lscran::asymptotics::{SweepPlan, DEFAULT_N_GRID};
use lscran::exponent::GridAxis;
use lscran::network::UserSelection;
use lscran::OperationKind;

use config::{resolve_operations, resolve_workers, ParamArgs, RunConfig};
pub use error::CliError;

pub const WORKERS_ENV: &str = "LSCRAN_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "lscran", version, about = "LS-CRAN scaling-exponent lab")]
pub struct Cli {
    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form exponents for each operation
    Theory(TheoryArgs),
    /// Supportable-user exponent over a (rho, tau) grid
    Contour(ContourArgs),
    /// Monte Carlo sweep over network sizes with log-log fits
    Simulate(SimulateArgs),
    /// Lemma oracles; exits 2 if any tolerance fails
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Operations (if, mrt, zf); repeat or comma-separate. Default: all
    #[arg(long = "op", value_delimiter = ',')]
    pub ops: Vec<OperationKind>,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long = "op", value_delimiter = ',')]
    pub ops: Vec<OperationKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho_max: Option<f64>,
    #[arg(long)]
    pub rho_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_steps: Option<usize>,
    /// Directory for contour_<op>.csv files; stdout if omitted
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long = "op", value_delimiter = ',')]
    pub ops: Vec<OperationKind>,
    /// Target network sizes N, comma-separated
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Vec<usize>,
    /// Trials per network size
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Directory for trials.csv and summary.csv
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Precode on the true channels instead of MMSE estimates
    #[arg(long)]
    pub genie: bool,
    /// Measure a uniformly random user instead of the most central one
    #[arg(long)]
    pub random_user: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Pathloss exponent(s) for the single-alpha oracles. Default: 3,4
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Fewer trials, tolerance widened to 0.25
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
}

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SEED: u64 = 2024;

fn axis(lo: Option<f64>, hi: Option<f64>, steps: Option<usize>, file: Option<[f64; 2]>, file_steps: Option<usize>) -> GridAxis<f64> {
    let [flo, fhi] = file.unwrap_or([-3.0, 3.0]);
    GridAxis::new(lo.unwrap_or(flo), hi.unwrap_or(fhi), steps.or(file_steps).unwrap_or(61))
}

pub fn simulate_plan(args: &SimulateArgs, cfg: &RunConfig) -> Result<SweepPlan<f64>, CliError> {
    let params = args.params.resolve(cfg)?;
    let mut plan = SweepPlan::new(
        params,
        args.trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS),
        args.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
    );
    plan.operations = resolve_operations(&args.ops, cfg);
    plan.n_grid = if !args.n_grid.is_empty() {
        args.n_grid.clone()
    } else {
        cfg.n_grid.clone().unwrap_or_else(|| DEFAULT_N_GRID.to_vec())
    };
    plan.genie_csi = args.genie || cfg.genie_csi.unwrap_or(false);
    plan.user_selection = if args.random_user {
        UserSelection::Random
    } else {
        cfg.user_selection.unwrap_or_default()
    };
    plan.validate()?;
    Ok(plan)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Theory(a) => {
            let p = a.params.resolve(&cfg)?;
            commands::theory(&p, &resolve_operations(&a.ops, &cfg), out)
        }
        Command::Contour(a) => {
            let p = a.params.resolve(&cfg)?;
            let rho = axis(a.rho_min, a.rho_max, a.rho_steps, cfg.rho_range, cfg.rho_steps);
            let tau = axis(a.tau_min, a.tau_max, a.tau_steps, cfg.tau_range, cfg.tau_steps);
            let dir = a.out_dir.clone().or(cfg.output.clone());
            commands::contour(&p, &resolve_operations(&a.ops, &cfg), rho, tau, dir.as_deref(), out)
        }
        Command::Simulate(a) => {
            let plan = simulate_plan(&a, &cfg)?;
            let workers = resolve_workers(a.workers, &cfg)?;
            let dir = a.out_dir.clone().or(cfg.output.clone());
            commands::simulate(&plan, workers, dir.as_deref(), out).map(|_| ())
        }
        Command::Verify(a) => {
            let mut opts = verify::VerifyOptions {
                quick: a.quick || cfg.quick.unwrap_or(false),
                seed: a.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
                workers: resolve_workers(a.workers, &cfg)?,
                ..Default::default()
            };
            if !a.alpha.is_empty() {
                opts.alphas = a.alpha.clone();
            } else if let Some(alpha) = cfg.alpha {
                opts.alphas = vec![alpha];
            }
            let checks = verify::run_verify(&opts)?;
            for c in &checks {
                writeln!(out, "{c}")?;
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Tolerance(failed.join("; ")))
            }
        }
    }
}
