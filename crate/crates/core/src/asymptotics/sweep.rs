use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{median, ExponentFit, StatisticKind};
use crate::channel::{draw_channels, estimate, EstimatedChannels};
use crate::error::{invalid, Error, Result};
use crate::exponent::{exponent_report, ExponentReport, OperationKind, ScalingParams};
use crate::network::{place_and_associate, NetworkConfig, UserSelection};
use crate::real::Real;
use crate::rng::derive_seed;
use crate::transmission::{measure_many, LinalgReal, LinkMetrics};

pub const DEFAULT_N_GRID: [usize; 6] = [256, 512, 1024, 2048, 4096, 8192];

/// Largest share of trials a single fit may drop.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.10;

/// Realizations tried per trial before it counts as failed.
pub const MAX_ATTEMPTS: u64 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan<T> {
    pub n_grid: Vec<usize>,
    pub trials_per_n: usize,
    pub params: ScalingParams<T>,
    pub operations: Vec<OperationKind>,
    pub master_seed: u64,
    #[serde(default)]
    pub user_selection: UserSelection,
    /// Skip estimation and precode on the true channels.
    #[serde(default)]
    pub genie_csi: bool,
}

impl<T: Real> SweepPlan<T> {
    pub fn new(params: ScalingParams<T>, trials_per_n: usize, master_seed: u64) -> Self {
        Self {
            n_grid: DEFAULT_N_GRID.to_vec(),
            trials_per_n,
            params,
            operations: OperationKind::ALL.to_vec(),
            master_seed,
            user_selection: UserSelection::Centroid,
            genie_csi: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < 4 {
            return Err(invalid("n_grid", "need at least 4 sizes"));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("n_grid", "must be strictly increasing"));
        }
        if self.n_grid[0] < 4 {
            return Err(invalid("n_grid", "sizes must be at least 4"));
        }
        if self.trials_per_n == 0 {
            return Err(invalid("trials_per_n", "must be positive"));
        }
        if self.operations.is_empty() {
            return Err(invalid("operations", "empty"));
        }
        let mut ops = self.operations.clone();
        ops.sort_by_key(|o| o.as_str());
        ops.dedup();
        if ops.len() != self.operations.len() {
            return Err(invalid("operations", "duplicate operation"));
        }
        self.params.validate()
    }
}

/// One row of the per-trial CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n_target: usize,
    pub n_realized: usize,
    pub operation: OperationKind,
    pub statistic: StatisticKind,
    pub trial: usize,
    pub value: f64,
}

/// One row of the summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub operation: OperationKind,
    pub statistic: StatisticKind,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub theory_exponent: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub records: Vec<TrialRecord>,
    /// Realizations discarded and redrawn (ill-conditioned Gram and so on).
    pub redraws: u64,
    /// `(grid index, trial)` pairs that never produced a usable realization.
    pub failed: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperationFits {
    pub operation: OperationKind,
    pub theory: ExponentReport<f64>,
    pub snr: ExponentFit,
    /// Absent for IF, whose SIR is infinite by construction.
    pub sir: Option<ExponentFit>,
    pub sinr: ExponentFit,
}

impl OperationFits {
    pub fn get(&self, stat: StatisticKind) -> Option<&ExponentFit> {
        match stat {
            StatisticKind::Snr => Some(&self.snr),
            StatisticKind::Sir => self.sir.as_ref(),
            StatisticKind::Sinr => Some(&self.sinr),
            StatisticKind::Custom => None,
        }
    }

    pub fn theory_exponent(&self, stat: StatisticKind) -> f64 {
        match stat {
            StatisticKind::Snr => self.theory.snr,
            StatisticKind::Sir => self.theory.sir,
            StatisticKind::Sinr => self.theory.sinr,
            StatisticKind::Custom => f64::NAN,
        }
    }

    pub fn summary(&self) -> Vec<SummaryRecord> {
        StatisticKind::LINK
            .iter()
            .filter_map(|&stat| {
                let fit = self.get(stat)?;
                let theory = self.theory_exponent(stat);
                Some(SummaryRecord {
                    operation: self.operation,
                    statistic: stat,
                    slope: fit.slope,
                    intercept: fit.intercept,
                    r2: fit.r_squared,
                    theory_exponent: theory,
                    abs_error: (fit.slope - theory).abs(),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub trials: TrialSet,
    pub fits: Vec<OperationFits>,
}

impl SweepOutcome {
    pub fn fit(&self, op: OperationKind, stat: StatisticKind) -> Option<&ExponentFit> {
        self.fits.iter().find(|f| f.operation == op)?.get(stat)
    }

    pub fn summary(&self) -> Vec<SummaryRecord> {
        self.fits.iter().flat_map(OperationFits::summary).collect()
    }
}

fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::DegenerateGeometry | Error::IllConditionedGram { .. } | Error::ZeroNormPrecoder { .. }
    )
}

struct Realized<T> {
    n_realized: usize,
    metrics: Vec<LinkMetrics<T>>,
}

fn realize<T: LinalgReal>(plan: &SweepPlan<T>, n_target: usize, seed: u64) -> Result<Realized<T>> {
    let cfg = NetworkConfig {
        n_target,
        params: plan.params,
        region_radius: T::one(),
        seed,
        user_selection: plan.user_selection,
    };
    let net = place_and_associate(&cfg)?;
    let n_realized = net.sizes.n_realized;
    let n = T::from_usize_lossy(n_realized);
    let p_ul = <T as num_traits::Float>::powf(n, plan.params.rho_ul);
    let p_dl = <T as num_traits::Float>::powf(n, plan.params.rho_dl);
    let ch = draw_channels(&net, seed);
    let est = if plan.genie_csi {
        EstimatedChannels::genie(&net, &ch)
    } else {
        estimate(&net, &ch, p_ul, seed)
    };
    let metrics = measure_many(&plan.operations, &net, &ch, &est, p_dl)?;
    Ok(Realized { n_realized, metrics })
}

enum TrialOutcome<T> {
    Done { redraws: u64, realized: Realized<T> },
    Failed { redraws: u64 },
}

fn run_trial<T: LinalgReal>(plan: &SweepPlan<T>, ni: usize, trial: usize) -> Result<TrialOutcome<T>> {
    for attempt in 0..MAX_ATTEMPTS {
        let seed = derive_seed(plan.master_seed, &[ni as u64, trial as u64, attempt]);
        match realize(plan, plan.n_grid[ni], seed) {
            Ok(realized) => {
                return Ok(TrialOutcome::Done {
                    redraws: attempt,
                    realized,
                })
            }
            Err(e) if recoverable(&e) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(TrialOutcome::Failed {
        redraws: MAX_ATTEMPTS,
    })
}

/// Runs every `(grid index, trial)` work item on a pool of `workers` threads.
///
/// Each item draws from streams keyed by its own index, and results come back
/// in key order, so the output does not depend on `workers`.
pub fn run_trials<T: LinalgReal>(plan: &SweepPlan<T>, workers: usize) -> Result<TrialSet> {
    plan.validate()?;
    let items: Vec<(usize, usize)> = (0..plan.n_grid.len())
        .flat_map(|ni| (0..plan.trials_per_n).map(move |t| (ni, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    let outcomes: Vec<Result<TrialOutcome<T>>> =
        pool.install(|| items.par_iter().map(|&(ni, t)| run_trial(plan, ni, t)).collect());

    let mut set = TrialSet {
        records: Vec::new(),
        redraws: 0,
        failed: Vec::new(),
    };
    for (&(ni, trial), outcome) in items.iter().zip(outcomes) {
        match outcome? {
            TrialOutcome::Done { redraws, realized } => {
                set.redraws += redraws;
                for (&op, m) in plan.operations.iter().zip(&realized.metrics) {
                    for (stat, value) in [
                        (StatisticKind::Snr, m.snr),
                        (StatisticKind::Sir, m.sir),
                        (StatisticKind::Sinr, m.sinr),
                    ] {
                        set.records.push(TrialRecord {
                            n_target: plan.n_grid[ni],
                            n_realized: realized.n_realized,
                            operation: op,
                            statistic: stat,
                            trial,
                            value: value.as_f64(),
                        });
                    }
                }
            }
            TrialOutcome::Failed { redraws } => {
                set.redraws += redraws;
                set.failed.push((ni, trial));
            }
        }
    }
    Ok(set)
}

/// Median-of-trials log-log fit for one operation and statistic.
pub fn fit_series(
    n_grid: &[usize],
    trials_per_n: usize,
    records: &[TrialRecord],
    op: OperationKind,
    stat: StatisticKind,
) -> Result<ExponentFit> {
    let mut points = Vec::with_capacity(n_grid.len());
    let mut excluded = 0usize;
    for (ni, &n_target) in n_grid.iter().enumerate() {
        let mut n_realized = None;
        let values: Vec<f64> = records
            .iter()
            .filter(|r| r.n_target == n_target && r.operation == op && r.statistic == stat)
            .inspect(|r| n_realized = Some(r.n_realized))
            .map(|r| r.value)
            .filter(|v| v.is_finite() && *v > 0.0)
            .collect();
        excluded += trials_per_n.saturating_sub(values.len());
        let med = median(&values);
        match (med, n_realized) {
            (Some(m), Some(n)) => points.push(((n as f64).ln(), m.ln())),
            _ => {
                return Err(Error::InsufficientPoints {
                    index: ni,
                    n: n_target as f64,
                })
            }
        }
    }
    let total = trials_per_n * n_grid.len();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * total as f64 {
        return Err(Error::ExcessiveExclusions {
            series: format!("{op} {stat}"),
            excluded,
            total,
        });
    }
    let mut fit = ExponentFit::from_log_points(points, stat)?;
    fit.excluded = excluded;
    Ok(fit)
}

pub fn fit_trials<T: Real>(plan: &SweepPlan<T>, set: &TrialSet) -> Result<Vec<OperationFits>> {
    let params = plan.params.cast::<f64>();
    plan.operations
        .iter()
        .map(|&op| {
            let series = |stat| fit_series(&plan.n_grid, plan.trials_per_n, &set.records, op, stat);
            Ok(OperationFits {
                operation: op,
                theory: exponent_report(op, &params)?,
                snr: series(StatisticKind::Snr)?,
                sir: match op {
                    OperationKind::If => None,
                    _ => Some(series(StatisticKind::Sir)?),
                },
                sinr: series(StatisticKind::Sinr)?,
            })
        })
        .collect()
}

pub fn run_sweep<T: LinalgReal>(plan: &SweepPlan<T>, workers: usize) -> Result<SweepOutcome> {
    let trials = run_trials(plan, workers)?;
    let fits = fit_trials(plan, &trials)?;
    Ok(SweepOutcome { trials, fits })
}

fn write_rows<W: io::Write, S: Serialize>(rows: &[S], w: W) -> io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()
}

fn read_rows<R: io::Read, S: for<'de> Deserialize<'de>>(r: R) -> io::Result<Vec<S>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(io::Error::from))
        .collect()
}

/// Infinite values are written as the literal `inf`.
pub fn write_trials_csv<W: io::Write>(records: &[TrialRecord], w: W) -> io::Result<()> {
    write_rows(records, w)
}

pub fn read_trials_csv<R: io::Read>(r: R) -> io::Result<Vec<TrialRecord>> {
    read_rows(r)
}

pub fn write_summary_csv<W: io::Write>(rows: &[SummaryRecord], w: W) -> io::Result<()> {
    write_rows(rows, w)
}

pub fn read_summary_csv<R: io::Read>(r: R) -> io::Result<Vec<SummaryRecord>> {
    read_rows(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan() -> SweepPlan<f64> {
        let mut plan = SweepPlan::new(ScalingParams::new(4.0, 0.5, 0.5), 6, 17);
        plan.n_grid = vec![64, 128, 256, 512];
        plan
    }

    #[test]
    fn plan_validation() {
        let mut p = small_plan();
        assert!(p.validate().is_ok());
        p.n_grid = vec![64, 64, 128, 256];
        assert!(p.validate().is_err());
        p.n_grid = vec![64, 128, 256];
        assert!(p.validate().is_err());
        let mut p = small_plan();
        p.operations = vec![OperationKind::Mrt, OperationKind::Mrt];
        assert!(p.validate().is_err());
        p.operations.clear();
        assert!(p.validate().is_err());
    }

    #[test]
    fn records_cover_grid() {
        let plan = small_plan();
        let set = run_trials(&plan, 1).unwrap();
        assert!(set.failed.is_empty());
        assert_eq!(set.records.len(), 4 * 6 * 3 * 3);
        assert!(set
            .records
            .iter()
            .filter(|r| r.operation == OperationKind::If && r.statistic == StatisticKind::Sir)
            .all(|r| r.value.is_infinite()));
        let fits = fit_trials(&plan, &set).unwrap();
        assert_eq!(fits.len(), 3);
        assert!(fits[0].sir.is_none());
        assert_eq!(fits.iter().map(|f| f.summary().len()).sum::<usize>(), 8);
    }

    #[test]
    fn worker_count_invariant() {
        let plan = small_plan();
        assert_eq!(run_trials(&plan, 1).unwrap(), run_trials(&plan, 3).unwrap());
    }

    #[test]
    fn missing_grid_point() {
        let plan = small_plan();
        let mut set = run_trials(&plan, 1).unwrap();
        set.records.retain(|r| r.n_target != 128);
        assert!(matches!(
            fit_trials(&plan, &set),
            Err(Error::InsufficientPoints { index: 1, .. })
        ));
    }

    #[test]
    fn exclusion_limit() {
        let plan = small_plan();
        let mut set = run_trials(&plan, 1).unwrap();
        for r in set.records.iter_mut() {
            if r.operation == OperationKind::Mrt && r.statistic == StatisticKind::Sinr && r.trial < 2 {
                r.value = 0.0;
            }
        }
        let err = fit_series(&plan.n_grid, 6, &set.records, OperationKind::Mrt, StatisticKind::Sinr);
        assert!(matches!(err, Err(Error::ExcessiveExclusions { excluded: 8, total: 24, .. })));
    }

    #[test]
    fn csv_round_trip_with_inf() {
        let set = run_trials(&small_plan(), 1).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&set.records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n_target,n_realized,operation,statistic,trial,value\n"));
        assert!(text.contains(",if,sir,0,inf\n"));
        assert_eq!(read_trials_csv(buf.as_slice()).unwrap(), set.records);
    }
}
