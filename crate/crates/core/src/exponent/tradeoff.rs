//! Supportable-user exponent under a total network power budget.
//!
//! With total power `Theta(N^rho)` spread over `N^zeta` users, each user's UL
//! and DL power exponent is `rho - zeta`. The supportable-user exponent is the
//! largest `zeta` in `[0, 1]` whose SINR exponent still meets the target `tau`.
//!
//! Two routes are provided. [`table_candidates`] is the closed-form region
//! table for the fully associated, pilot-rich network. [`supportable_users_search`]
//! solves the supremum directly on top of [`exponent_report_unchecked`] and
//! also covers partial association and pilot reuse.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::params::{OperationKind, Regime, ScalingParams};
use super::theorems::exponent_report_unchecked;
use crate::error::{invalid, Error, Result};
use crate::real::Real;

/// Operating region of the `(rho, tau)` plane.
///
/// `A`, `B`, `C` are SNR-limited (regimes L, M, H/EH); `D`, `E`, `F`, `G` are
/// SIR-limited (L, M, H, EH).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::A,
        Region::B,
        Region::C,
        Region::D,
        Region::E,
        Region::F,
        Region::G,
    ];

    pub fn letter(self) -> char {
        match self {
            Region::A => 'A',
            Region::B => 'B',
            Region::C => 'C',
            Region::D => 'D',
            Region::E => 'E',
            Region::F => 'F',
            Region::G => 'G',
        }
    }

    pub fn is_snr_limited(self) -> bool {
        matches!(self, Region::A | Region::B | Region::C)
    }

    fn from_limit(snr_limited: bool, regime: Regime) -> Region {
        match (snr_limited, regime) {
            (true, Regime::L) => Region::A,
            (true, Regime::M) => Region::B,
            (true, Regime::H | Regime::EH) => Region::C,
            (false, Regime::L) => Region::D,
            (false, Regime::M) => Region::E,
            (false, Regime::H) => Region::F,
            (false, Regime::EH) => Region::G,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// One cell of the tradeoff plane. `region == None` marks an infeasible target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint<T> {
    pub rho: T,
    pub tau: T,
    pub zeta_user: T,
    pub region: Option<Region>,
}

impl<T> TradeoffPoint<T> {
    pub fn region_label(&self) -> String {
        match self.region {
            Some(r) => r.letter().to_string(),
            None => "infeasible".to_string(),
        }
    }
}

fn clamp_unit<T: Real>(u: T) -> T {
    u.min(T::one()).max(T::zero())
}

/// Closed-form region conditions and user-exponent formulas for `op`.
///
/// Returns every region whose condition holds at `(rho, tau)` together with its
/// unclamped `u`. Only `alpha`, `eta_bs` and `eta_ant` of `p` are read. Two
/// entries of the printed table are corrected: row D uses `eta_ant` (not
/// `eta_ant / 2`), and the ZF row F also requires `rho >= (1 - alpha/2) eta_bs`
/// and that row C does not hold. Both corrections are what the supremum
/// definition yields; see the cross-check tests.
pub fn table_candidates<T: Real>(op: OperationKind, rho: T, tau: T, p: &ScalingParams<T>) -> Vec<(Region, T)> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let a = p.alpha;
    let ha = a / two;
    let eb = p.eta_bs;
    let ea = p.eta_ant;
    let low_ul = (T::one() - ha) * eb;
    let peak = ha * eb + ea;
    let mut out = Vec::with_capacity(2);

    let in_a = tau < -ea;
    let in_b = -ea <= tau && tau < ea;
    let in_c_tau = tau >= ea;
    let u_a = rho - tau + ha * eb;
    let u_b = rho - half * tau + ha * eb + half * ea;
    let u_c = rho - tau + ha * eb + ea;

    if op == OperationKind::If {
        if in_a {
            out.push((Region::A, u_a));
        }
        if in_b {
            out.push((Region::B, u_b));
        }
        if in_c_tau {
            out.push((Region::C, u_c));
        }
        return out;
    }

    // power-limited left half-plane shared by MRT and ZF
    let c_holds = in_c_tau && a / (two - a) * rho + tau >= peak;
    if in_a && rho < low_ul {
        out.push((Region::A, u_a));
    }
    if in_b && rho < low_ul {
        out.push((Region::B, u_b));
    }
    if c_holds {
        out.push((Region::C, u_c));
    }
    let sir_de = half * (rho - tau + (ha + T::one()) * eb + ea);
    if rho >= low_ul && rho + tau < low_ul - ea {
        out.push((Region::D, sir_de));
    }
    if rho >= low_ul && low_ul - ea <= rho + tau && rho + tau < low_ul + ea {
        out.push((Region::E, sir_de));
    }
    match op {
        OperationKind::Mrt => {
            if low_ul + ea <= rho + tau && tau < ea {
                out.push((Region::F, eb + ea - tau));
            }
            if in_c_tau && a / (two - a) * rho + tau < peak {
                out.push((Region::G, two / a * (peak - tau)));
            }
        }
        OperationKind::Zf => {
            let s = tau + rho;
            if s < peak && s >= low_ul + ea && rho >= low_ul && !c_holds {
                let u = a / (two * (a - T::one())) * ((T::one() - two / a) * rho - tau + peak);
                out.push((Region::F, u));
            }
            if tau - rho <= peak && s >= peak {
                out.push((Region::G, half * (rho - tau + peak)));
            }
        }
        OperationKind::If => unreachable!(),
    }
    out
}

/// Resolves the table lookup: shared boundaries (equal clamped `u`) take the
/// first region label; conflicting overlaps are a transcription error. A
/// holding row whose `u` is negative is reported infeasible, as the supremum
/// search does.
pub fn table_lookup<T: Real>(op: OperationKind, rho: T, tau: T, p: &ScalingParams<T>) -> Result<TradeoffPoint<T>> {
    let cands = table_candidates(op, rho, tau, p);
    let Some(&(first, u_first)) = cands.first() else {
        return Ok(TradeoffPoint {
            rho,
            tau,
            zeta_user: T::zero(),
            region: None,
        });
    };
    // u < 0 asks for fewer than one user: even a single user misses tau
    if cands.iter().all(|&(_, u)| u.as_f64() < -LABEL_TOLERANCE) {
        return Ok(TradeoffPoint {
            rho,
            tau,
            zeta_user: T::zero(),
            region: None,
        });
    }
    let zeta = clamp_unit(u_first);
    for &(other, u) in &cands[1..] {
        if (clamp_unit(u) - zeta).abs().as_f64() > 1e-9 {
            return Err(Error::AmbiguousRegion {
                rho: rho.as_f64(),
                tau: tau.as_f64(),
                first: first.letter(),
                second: other.letter(),
            });
        }
    }
    Ok(TradeoffPoint {
        rho,
        tau,
        zeta_user: zeta,
        region: Some(first),
    })
}

/// How the pilot budget follows the user count while `eta_user` is searched.
#[derive(Debug, Clone, Copy, PartialEq)]
enum PilotBudget<T> {
    /// One orthogonal pilot per user whatever the user count.
    PerUser,
    /// `N^upsilon` pilots, never more than users.
    Fixed(T),
}

impl<T: Real> PilotBudget<T> {
    fn of(p: &ScalingParams<T>) -> Self {
        if p.pilot_reuse() {
            PilotBudget::Fixed(p.upsilon_pr)
        } else {
            PilotBudget::PerUser
        }
    }

    fn exponent(self, eta_user: T) -> T {
        match self {
            PilotBudget::PerUser => eta_user,
            PilotBudget::Fixed(v) => v.min(eta_user),
        }
    }
}

/// Parameters of the network carrying `N^zeta` users at total power `N^rho`.
pub fn loaded_params<T: Real>(rho: T, zeta: T, p: &ScalingParams<T>) -> ScalingParams<T> {
    let pilots = PilotBudget::of(p);
    ScalingParams {
        eta_user: zeta,
        rho_ul: rho - zeta,
        rho_dl: rho - zeta,
        upsilon_pr: pilots.exponent(zeta),
        ..*p
    }
}

const SEARCH_GRID: usize = 2048;
const FEASIBILITY_SLACK: f64 = 1e-12;
const LABEL_TOLERANCE: f64 = 1e-9;

/// Supremum of feasible user exponents by scan and bisection.
///
/// The SINR exponent is piecewise linear in `zeta`, so a grid scan from the top
/// finds the last feasible cell and bisection pins the crossing to machine
/// precision.
pub fn supportable_users_search<T: Real>(
    op: OperationKind,
    rho: T,
    tau: T,
    p: &ScalingParams<T>,
) -> Result<TradeoffPoint<T>> {
    check_inputs(rho, tau, p)?;
    let slack = T::lit(FEASIBILITY_SLACK);
    let feasible = |z: T| exponent_report_unchecked(op, &loaded_params(rho, z, p)).sinr >= tau - slack;
    let step = T::one() / T::from_usize_lossy(SEARCH_GRID);

    let mut upper = None;
    for i in (0..=SEARCH_GRID).rev() {
        let z = T::from_usize_lossy(i) * step;
        if feasible(z) {
            upper = Some(i);
            break;
        }
    }
    let zeta = match upper {
        None => {
            return Ok(TradeoffPoint {
                rho,
                tau,
                zeta_user: T::zero(),
                region: None,
            })
        }
        Some(i) if i == SEARCH_GRID => T::one(),
        Some(i) => {
            let mut lo = T::from_usize_lossy(i) * step;
            let mut hi = T::from_usize_lossy(i + 1) * step;
            for _ in 0..200 {
                let mid = (lo + hi) / T::lit(2.0);
                if mid <= lo || mid >= hi {
                    break;
                }
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };
    Ok(TradeoffPoint {
        rho,
        tau,
        zeta_user: zeta,
        region: Some(region_at_optimum(op, rho, zeta, p)),
    })
}

/// Labels the optimum by which exponent binds and which UL regime the loaded
/// network sits in. On boundaries the SNR limit and the higher-CSI regime win,
/// as in the table.
fn region_at_optimum<T: Real>(op: OperationKind, rho: T, zeta: T, p: &ScalingParams<T>) -> Region {
    let loaded = loaded_params(rho, zeta, p);
    let report = exponent_report_unchecked(op, &loaded);
    let tol = T::lit(LABEL_TOLERANCE);
    let mut limits = Vec::with_capacity(2);
    if op == OperationKind::If || report.snr <= report.sir + tol {
        limits.push(true);
    }
    if op != OperationKind::If && report.sir <= report.snr + tol {
        limits.push(false);
    }

    let r = loaded.rho_ul;
    let dens = loaded.half_alpha() * loaded.eta_bs;
    let low = -dens - loaded.eta_ant;
    let mut regimes = Vec::with_capacity(2);
    if r <= low + tol {
        regimes.push(Regime::L);
    }
    if r >= low - tol && r <= -dens + tol {
        regimes.push(Regime::M);
    }
    if r >= -dens - tol && r <= tol {
        regimes.push(Regime::H);
    }
    if r >= -tol {
        regimes.push(Regime::EH);
    }

    let regime = regimes.into_iter().max().expect("some regime applies");
    Region::from_limit(limits[0], regime)
}

fn check_inputs<T: Real>(rho: T, tau: T, p: &ScalingParams<T>) -> Result<()> {
    if !rho.is_finite() {
        return Err(invalid("rho", "must be finite"));
    }
    if !tau.is_finite() {
        return Err(invalid("tau", "must be finite"));
    }
    // eta_user, rho_ul and rho_dl are overridden by the power split
    let probe = ScalingParams {
        eta_user: T::one(),
        upsilon_pr: T::one(),
        rho_ul: T::zero(),
        rho_dl: T::zero(),
        ..*p
    };
    probe.validate()
}

/// Supportable-user exponent of `op` at total-power exponent `rho` and QoS
/// exponent `tau`.
///
/// `p.rho_ul`, `p.rho_dl` and `p.eta_user` are ignored. With full association
/// and one pilot per user the closed-form table is used; otherwise the
/// supremum is found numerically.
pub fn supportable_users<T: Real>(
    op: OperationKind,
    rho: T,
    tau: T,
    p: &ScalingParams<T>,
) -> Result<TradeoffPoint<T>> {
    check_inputs(rho, tau, p)?;
    if p.partial_association() || p.pilot_reuse() {
        supportable_users_search(op, rho, tau, p)
    } else {
        table_lookup(op, rho, tau, p)
    }
}

/// One axis of a tradeoff grid. A single step yields just `lo`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis<T> {
    pub lo: T,
    pub hi: T,
    pub steps: usize,
}

impl<T: Real> GridAxis<T> {
    pub fn new(lo: T, hi: T, steps: usize) -> Self {
        Self { lo, hi, steps }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(invalid(name, "range must be finite"));
        }
        if self.steps == 0 {
            return Err(invalid(name, "needs at least one step"));
        }
        if self.steps > 1 && self.hi < self.lo {
            return Err(invalid(name, "upper end below lower end"));
        }
        Ok(())
    }

    pub fn values(&self) -> impl Iterator<Item = T> + '_ {
        let span = self.hi - self.lo;
        let denom = T::from_usize_lossy(self.steps.saturating_sub(1).max(1));
        (0..self.steps).map(move |i| {
            if i + 1 == self.steps && self.steps > 1 {
                self.hi
            } else {
                self.lo + span * T::from_usize_lossy(i) / denom
            }
        })
    }
}

/// Row-major grid (`rho` outer, `tau` inner) of [`supportable_users`].
pub fn tradeoff_grid<T: Real>(
    op: OperationKind,
    rho: GridAxis<T>,
    tau: GridAxis<T>,
    p: &ScalingParams<T>,
) -> Result<Vec<TradeoffPoint<T>>> {
    rho.validate("rho")?;
    tau.validate("tau")?;
    let taus: Vec<T> = tau.values().collect();
    let mut out = Vec::with_capacity(rho.steps * tau.steps);
    for r in rho.values() {
        for &t in &taus {
            out.push(supportable_users(op, r, t, p)?);
        }
    }
    Ok(out)
}
