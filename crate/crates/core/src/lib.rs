//! Scaling exponents of large-scale cloud radio access networks.
//!
//! [`exponent`] evaluates the closed-form SNR/SIR/SINR exponents and the
//! supportable-user tradeoff. The simulator side ([`network`], [`channel`],
//! [`transmission`]) realizes finite networks, and [`asymptotics`] fits
//! log-log slopes over network sizes to compare against the closed forms.
//!
//! Everything is generic over the scalar (`f32` or `f64`); the aliases below
//! fix the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod channel;
pub mod error;
pub mod exponent;
pub mod network;
pub mod real;
pub mod rng;
pub mod transmission;

pub use error::{Error, Result};
pub use exponent::{ExponentReport, OperationKind, Regime, ScalingParams};
pub use real::Real;

pub type ScalingParams64 = exponent::ScalingParams<f64>;
pub type ScalingParams32 = exponent::ScalingParams<f32>;
pub type ExponentReport64 = exponent::ExponentReport<f64>;
pub type ExponentReport32 = exponent::ExponentReport<f32>;
pub type NetworkInstance64 = network::NetworkInstance<f64>;
pub type NetworkInstance32 = network::NetworkInstance<f32>;
pub type LinkMetrics64 = transmission::LinkMetrics<f64>;
pub type LinkMetrics32 = transmission::LinkMetrics<f32>;
pub type SweepPlan64 = asymptotics::SweepPlan<f64>;
pub type SweepPlan32 = asymptotics::SweepPlan<f32>;
