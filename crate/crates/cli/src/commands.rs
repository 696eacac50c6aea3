use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use lscran::asymptotics::{
    fit_trials, run_trials, write_summary_csv, write_trials_csv, SweepOutcome, SweepPlan,
};
use lscran::exponent::{
    backhaul_overhead_exponent, exponent_report, if_optimality_threshold, tradeoff_grid, GridAxis,
};
use lscran::{OperationKind, ScalingParams64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;

pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const INCOMPLETE_FILE: &str = "INCOMPLETE";

/// Finite numbers stay numbers; infinities become the strings `inf`/`-inf`.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

/// One JSON object per operation, one per line.
pub fn theory(p: &ScalingParams64, ops: &[OperationKind], out: &mut dyn Write) -> Result<(), CliError> {
    let overhead = backhaul_overhead_exponent(p);
    for &op in ops {
        let r = exponent_report(op, p)?;
        let line = json!({
            "operation": op.as_str(),
            "regime": r.regime.as_str(),
            "xi": num(r.xi),
            "delta": r.delta.map(num).unwrap_or(Value::Null),
            "snr": num(r.snr),
            "sir": num(r.sir),
            "sinr": num(r.sinr),
            "if_threshold": num(if_optimality_threshold(op, p)),
            "backhaul_overhead": num(overhead),
        });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRow {
    pub rho: f64,
    pub tau: f64,
    pub operation: OperationKind,
    pub region: String,
    pub zeta: f64,
}

pub fn contour_rows(
    p: &ScalingParams64,
    op: OperationKind,
    rho: GridAxis<f64>,
    tau: GridAxis<f64>,
) -> Result<Vec<ContourRow>, CliError> {
    Ok(tradeoff_grid(op, rho, tau, p)?
        .into_iter()
        .map(|pt| ContourRow {
            rho: pt.rho,
            tau: pt.tau,
            operation: op,
            region: pt.region_label(),
            zeta: pt.zeta_user,
        })
        .collect())
}

fn write_csv<S: Serialize, W: Write>(rows: &[S], w: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

pub fn contour_path(dir: &Path, op: OperationKind) -> PathBuf {
    dir.join(format!("contour_{}.csv", op.as_str()))
}

/// With `out_dir`, one `contour_<op>.csv` per operation; otherwise a single
/// CSV on `out`.
pub fn contour(
    p: &ScalingParams64,
    ops: &[OperationKind],
    rho: GridAxis<f64>,
    tau: GridAxis<f64>,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    match out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for &op in ops {
                let rows = contour_rows(p, op, rho, tau)?;
                write_csv(&rows, create(&contour_path(dir, op))?)?;
            }
        }
        None => {
            let mut rows = Vec::new();
            for &op in ops {
                rows.extend(contour_rows(p, op, rho, tau)?);
            }
            write_csv(&rows, out)?;
        }
    }
    Ok(())
}

/// Runs the sweep. Per-trial rows are flushed before fitting, so a failed fit
/// still leaves them on disk next to an `INCOMPLETE` marker.
pub fn simulate(
    plan: &SweepPlan<f64>,
    workers: usize,
    out_dir: Option<&Path>,
    out: &mut dyn Write,
) -> Result<SweepOutcome, CliError> {
    let trials = run_trials(plan, workers)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let marker = dir.join(INCOMPLETE_FILE);
        if marker.exists() {
            fs::remove_file(&marker)?;
        }
        write_trials_csv(&trials.records, create(&dir.join(TRIALS_FILE))?)?;
    }
    let fits = match fit_trials(plan, &trials) {
        Ok(f) => f,
        Err(e) => {
            if let Some(dir) = out_dir {
                fs::write(dir.join(INCOMPLETE_FILE), format!("{e}\n"))?;
            }
            return Err(e.into());
        }
    };
    let outcome = SweepOutcome { trials, fits };
    let summary = outcome.summary();
    if let Some(dir) = out_dir {
        write_summary_csv(&summary, create(&dir.join(SUMMARY_FILE))?)?;
    }
    write_summary_csv(&summary, &mut *out)?;
    Ok(outcome)
}
