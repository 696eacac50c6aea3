//! Closed-form scaling exponents of the SNR, SIR and SINR of a randomly
//! selected user under IF, MRT and ZF operation.
//!
//! All formulas are compositions of the hinge `(x)^+`, so every exponent is a
//! continuous piecewise-linear function of the power exponents.

use serde::{Deserialize, Serialize};

use super::params::{OperationKind, Regime, ScalingParams};
use crate::error::Result;
use crate::real::Real;

/// Exponents of one operation at one point of parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport<T> {
    pub operation: OperationKind,
    pub regime: Regime,
    /// Array gain, already reduced by pilot contamination when pilots are reused.
    pub xi: T,
    /// SNR-to-SIR gap after association and pilot substitutions; `None` for IF.
    pub delta: Option<T>,
    pub snr: T,
    /// `+inf` for IF.
    pub sir: T,
    pub sinr: T,
}

/// UL-power regime. Boundaries belong to the higher-CSI side.
pub fn classify_regime<T: Real>(p: &ScalingParams<T>) -> Regime {
    let densification = p.half_alpha() * p.eta_bs;
    if p.rho_ul >= T::zero() {
        Regime::EH
    } else if p.rho_ul >= -densification {
        Regime::H
    } else if p.rho_ul >= -densification - p.eta_ant {
        Regime::M
    } else {
        Regime::L
    }
}

/// Array gain `Xi`, between 0 and `eta_ant`.
pub fn array_gain<T: Real>(p: &ScalingParams<T>) -> T {
    let base = p.rho_ul + p.half_alpha() * p.eta_bs;
    (base + p.eta_ant).pos() - base.pos()
}

/// Array gain and contamination gap under pilot reuse, `(Xi_PR, Delta_PR)`.
///
/// Only meaningful when `upsilon_pr < eta_user`; with one pilot per user the
/// contamination term does not enter the gap.
pub fn pilot_limited_terms<T: Real>(p: &ScalingParams<T>) -> (T, T) {
    let ha = p.half_alpha();
    let sharing = p.eta_user - p.upsilon_pr;
    let base = p.rho_ul + ha * p.eta_bs;
    let xi_pr = (base + p.eta_ant).pos() - (base + (sharing - p.eta_bs).pos()).pos();
    let delta_pr =
        p.rho_dl + ha * p.eta_bs.min(sharing) + (sharing - p.eta_bs).pos() + xi_pr;
    (xi_pr, delta_pr)
}

/// Array gain actually realized, accounting for pilot reuse.
pub fn effective_array_gain<T: Real>(p: &ScalingParams<T>) -> T {
    if p.pilot_reuse() {
        pilot_limited_terms(p).0
    } else {
        array_gain(p)
    }
}

/// SNR exponent, identical for all three operations.
pub fn snr_exponent<T: Real>(p: &ScalingParams<T>) -> T {
    p.rho_dl + p.half_alpha() * p.eta_bs + effective_array_gain(p)
}

/// MRT gap. Independent of the UL power and of the antenna count.
pub fn delta_mrt<T: Real>(p: &ScalingParams<T>) -> T {
    p.rho_dl + p.half_alpha() * p.eta_bs.min(p.eta_user) + (p.eta_user - p.eta_bs).pos()
}

/// ZF gap: the MRT gap reduced by what accurate CSI lets ZF cancel.
pub fn delta_zf<T: Real>(p: &ScalingParams<T>) -> T {
    let two_over_alpha = T::lit(2.0) / p.alpha;
    delta_mrt(p)
        - (T::one() - two_over_alpha) * (p.half_alpha() * p.eta_bs.min(p.eta_user) + p.rho_ul).pos()
        - two_over_alpha * p.rho_ul.pos()
}

/// UL power exponent seen by the central processor under partial association.
///
/// A user's CSI is simply absent at non-associated BSs, which acts like a UL
/// power cap of `(alpha/2)(upsilon_pa - eta_bs)`.
pub fn effective_ul_power<T: Real>(p: &ScalingParams<T>) -> T {
    if p.partial_association() {
        p.rho_ul.min(p.half_alpha() * (p.upsilon_pa - p.eta_bs))
    } else {
        p.rho_ul
    }
}

/// Gap of `op` with the association substitution applied first, then the
/// pilot-contamination maximum. `None` for IF.
pub fn operation_gap<T: Real>(op: OperationKind, p: &ScalingParams<T>) -> Option<T> {
    let substituted = ScalingParams {
        rho_ul: effective_ul_power(p),
        ..*p
    };
    let gap = match op {
        OperationKind::If => return None,
        OperationKind::Mrt => delta_mrt(&substituted),
        OperationKind::Zf => delta_zf(&substituted),
    };
    if p.pilot_reuse() {
        Some(gap.max(pilot_limited_terms(p).1))
    } else {
        Some(gap)
    }
}

/// Assembles the report from already-validated parameters.
pub fn exponent_report_unchecked<T: Real>(op: OperationKind, p: &ScalingParams<T>) -> ExponentReport<T> {
    let xi = effective_array_gain(p);
    let snr = p.rho_dl + p.half_alpha() * p.eta_bs + xi;
    let delta = operation_gap(op, p);
    let (sir, sinr) = match delta {
        None => (T::infinity(), snr),
        Some(d) => (snr - d, snr - d.pos()),
    };
    ExponentReport {
        operation: op,
        regime: classify_regime(p),
        xi,
        delta,
        snr,
        sir,
        sinr,
    }
}

/// Validates `p` and reports the SNR/SIR/SINR exponents of `op`.
pub fn exponent_report<T: Real>(op: OperationKind, p: &ScalingParams<T>) -> Result<ExponentReport<T>> {
    p.validate()?;
    Ok(exponent_report_unchecked(op, p))
}

/// Largest DL power exponent at which `op` is still asymptotically
/// interference-free (`Delta <= 0`). The gap is affine in `rho_dl` with unit
/// slope. IF is interference-free at any power, so it returns `+inf`.
pub fn if_optimality_threshold<T: Real>(op: OperationKind, p: &ScalingParams<T>) -> T {
    match operation_gap(op, p) {
        None => T::infinity(),
        Some(gap) => p.rho_dl - gap,
    }
}

/// Exponent of the total front/backhaul load, in complex values.
///
/// Each of the `N^eta_user` users ships `M` coefficients from each BS where
/// its CSI is usable; that set scales as `N^(eta_bs + (2/alpha) rho)` with the
/// association-limited UL exponent, floored at a bounded set and capped at
/// the association budget.
pub fn backhaul_overhead_exponent<T: Real>(p: &ScalingParams<T>) -> T {
    let useful = p.eta_bs + T::lit(2.0) / p.alpha * effective_ul_power(p).min(T::zero());
    let association = useful.max(T::zero()).min(p.upsilon_pa);
    p.eta_user + p.eta_ant + association
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn sym(rho_ul: f64, rho_dl: f64) -> ScalingParams<f64> {
        ScalingParams::new(4.0, 0.5, 0.5).with_powers(rho_ul, rho_dl)
    }

    fn close(a: f64, b: f64) {
        assert!((a - b).abs() <= TOL, "{a} vs {b}");
    }

    #[test]
    fn regimes_and_boundaries() {
        assert_eq!(classify_regime(&sym(0.2, 0.0)), Regime::EH);
        assert_eq!(classify_regime(&sym(0.0, 0.0)), Regime::EH);
        assert_eq!(classify_regime(&sym(-1.0, 0.0)), Regime::H);
        assert_eq!(classify_regime(&sym(-1.25, 0.0)), Regime::M);
        assert_eq!(classify_regime(&sym(-1.5, 0.0)), Regime::M);
        assert_eq!(classify_regime(&sym(-2.0, 0.0)), Regime::L);
    }

    #[test]
    fn array_gain_values() {
        close(array_gain(&sym(0.0, 0.0)), 0.5);
        close(array_gain(&sym(-1.25, 0.0)), 0.25);
        close(array_gain(&sym(-2.0, 0.0)), 0.0);
    }

    #[test]
    fn snr_values() {
        close(snr_exponent(&sym(0.0, 0.0)), 1.5);
        close(snr_exponent(&sym(-2.0, 0.0)), 1.0);
        close(snr_exponent(&sym(-2.0, 0.7)), 1.7);
    }

    #[test]
    fn mrt_gap_values() {
        close(delta_mrt(&sym(0.0, 0.0)), 1.0);
        let mut single = sym(0.0, 0.0);
        single.eta_user = 0.0;
        single.upsilon_pr = 0.0;
        close(delta_mrt(&single), 0.0);
        let asym = ScalingParams::new(4.0, 0.3, 0.7);
        close(delta_mrt(&asym), 1.0);
    }

    #[test]
    fn zf_gap_values() {
        close(delta_zf(&sym(0.0, 0.0)), 0.5);
        close(delta_zf(&sym(-2.0, 0.0)), 1.0);
        close(delta_zf(&sym(1.0, 0.0)), -0.5);
    }

    #[test]
    fn association_substitution() {
        close(effective_ul_power(&sym(0.0, 0.0).with_association(0.2)), -0.6);
        close(effective_ul_power(&sym(-0.3, 0.0)), -0.3);
        close(effective_ul_power(&sym(-2.0, 0.0).with_association(0.2)), -2.0);
        let p = sym(0.0, 0.0).with_association(0.2);
        close(operation_gap(OperationKind::Zf, &p).unwrap(), 0.8);
        close(operation_gap(OperationKind::Mrt, &p).unwrap(), 1.0);
    }

    #[test]
    fn pilot_reuse_terms() {
        let p = sym(0.0, 0.0).with_pilots(0.2);
        let (xi, d) = pilot_limited_terms(&p);
        close(xi, 0.5);
        close(d, 1.1);
        let r = exponent_report(OperationKind::Zf, &p).unwrap();
        close(r.delta.unwrap(), 1.1);
        close(r.sinr, 0.4);
        // one pilot per user leaves the gap untouched
        let r = exponent_report(OperationKind::Zf, &sym(0.0, 0.0)).unwrap();
        close(r.delta.unwrap(), 0.5);
    }

    #[test]
    fn reports_at_symmetric_point() {
        let p = sym(0.0, 0.0);
        let mrt = exponent_report(OperationKind::Mrt, &p).unwrap();
        close(mrt.snr, 1.5);
        close(mrt.sir, 0.5);
        close(mrt.sinr, 0.5);
        let zf = exponent_report(OperationKind::Zf, &p).unwrap();
        close(zf.sir, 1.0);
        close(zf.sinr, 1.0);
        let ideal = exponent_report(OperationKind::If, &p).unwrap();
        close(ideal.snr, 1.5);
        assert!(ideal.sir.is_infinite() && ideal.sir > 0.0);
        close(ideal.sinr, 1.5);
        assert!(ideal.delta.is_none());
    }

    #[test]
    fn report_rejects_invalid() {
        let mut p = sym(0.0, 0.0);
        p.alpha = 1.5;
        assert!(exponent_report(OperationKind::Mrt, &p).is_err());
    }

    #[test]
    fn thresholds() {
        close(if_optimality_threshold(OperationKind::Mrt, &sym(0.0, 0.0)), -1.0);
        close(if_optimality_threshold(OperationKind::Zf, &sym(1.0, 0.0)), 0.5);
        close(if_optimality_threshold(OperationKind::Zf, &sym(-2.0, 0.0)), -1.0);
        assert!(if_optimality_threshold(OperationKind::If, &sym(0.0, 0.0)).is_infinite());
    }

    #[test]
    fn thresholds_match_closed_forms() {
        // MRT: -(a/2) eta_user if eta_bs >= eta_user, else -(a/2) eta_bs - (eta_user - eta_bs)
        for (eb, eu) in [(0.6, 0.3), (0.3, 0.8), (0.5, 0.5)] {
            let p = ScalingParams::new(3.5, eb, eu).with_powers(-0.4, 0.9);
            let expected = if eb >= eu { -1.75 * eu } else { -1.75 * eb - (eu - eb) };
            close(if_optimality_threshold(OperationKind::Mrt, &p), expected);
        }
        // ZF, eta_bs < eta_user, H regime: -eta_user + (1 - 2/a) rho_ul
        let p = ScalingParams::new(4.0, 0.4, 0.7).with_powers(-0.5, 0.0);
        assert_eq!(classify_regime(&p), Regime::H);
        close(if_optimality_threshold(OperationKind::Zf, &p), -0.7 + 0.5 * -0.5);
        // ZF, EH: rho_ul - eta_user
        let p = ScalingParams::new(4.0, 0.4, 0.7).with_powers(0.3, 0.0);
        close(if_optimality_threshold(OperationKind::Zf, &p), 0.3 - 0.7);
    }

    #[test]
    fn overhead() {
        close(backhaul_overhead_exponent(&sym(0.0, 0.0)), 1.5);
        close(backhaul_overhead_exponent(&sym(-1.0, 0.0)), 1.0);
        close(backhaul_overhead_exponent(&sym(0.8, 0.0)), 1.5);
        // bounded association in L: only users and antennas remain
        close(backhaul_overhead_exponent(&sym(-3.0, 0.0)), 1.0);
        // capped by the association budget
        close(backhaul_overhead_exponent(&sym(0.0, 0.0).with_association(0.2)), 1.2);
    }

    #[test]
    fn generic_over_f32() {
        let p = ScalingParams::<f32>::new(4.0, 0.5, 0.5);
        let r = exponent_report(OperationKind::Zf, &p).unwrap();
        assert!((r.sinr - 1.0).abs() < 1e-6);
    }
}
