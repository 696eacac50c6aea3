//! Empirical exponent estimation and lemma oracles.

mod fit;
mod lemmas;
mod sweep;

pub use fit::{median, ExponentFit, StatisticKind};
pub use lemmas::{
    clipped_pathloss, corollary1_sup, disk_radius_quantile, disk_radius_sampler, integrate,
    lemma1_empirical, lemma1_prediction, lemma2_part1, lemma2_part2_empirical,
    lemma2_part2_prediction, DoubleSumPlan, PiecewiseLinear, DEFAULT_EXCLUSION_SCALE,
};
pub use sweep::{
    fit_series, fit_trials, read_summary_csv, read_trials_csv, run_sweep, run_trials,
    write_summary_csv, write_trials_csv, OperationFits, SummaryRecord, SweepOutcome, SweepPlan,
    TrialRecord, TrialSet, DEFAULT_N_GRID, MAX_ATTEMPTS, MAX_EXCLUDED_FRACTION,
};
