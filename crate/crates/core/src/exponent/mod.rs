//! Closed-form scaling-exponent engine.

mod params;
mod theorems;
mod tradeoff;

pub use params::{OperationKind, Regime, ScalingParams, PATHLOSS_MARGIN, SPLIT_TOLERANCE};
pub use theorems::{
    array_gain, backhaul_overhead_exponent, classify_regime, delta_mrt, delta_zf,
    effective_array_gain, effective_ul_power, exponent_report, exponent_report_unchecked,
    if_optimality_threshold, operation_gap, pilot_limited_terms, snr_exponent, ExponentReport,
};
pub use tradeoff::{
    loaded_params, supportable_users, supportable_users_search, table_candidates, table_lookup,
    tradeoff_grid, GridAxis, Region, TradeoffPoint,
};
