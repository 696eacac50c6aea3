use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::real::Real;

/// Tolerance on the `eta_bs + eta_ant = 1` identity.
pub const SPLIT_TOLERANCE: f64 = 1e-12;
/// Pathloss exponents at or below `2 + PATHLOSS_MARGIN` are rejected.
pub const PATHLOSS_MARGIN: f64 = 1e-9;

/// Exponent-space description of a family of networks indexed by the size
/// `N = L * M`.
///
/// Every count and power is written as `Theta(N^x)` and only the exponent `x`
/// is stored. `upsilon_pa == eta_bs` means full association and
/// `upsilon_pr == eta_user` means one orthogonal pilot per user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams<T> {
    pub eta_bs: T,
    pub eta_ant: T,
    pub eta_user: T,
    pub alpha: T,
    pub rho_ul: T,
    pub rho_dl: T,
    pub upsilon_pa: T,
    pub upsilon_pr: T,
}

impl<T: Real> ScalingParams<T> {
    /// Full association, no pilot reuse, unit UL/DL power exponents of zero.
    pub fn new(alpha: T, eta_bs: T, eta_user: T) -> Self {
        Self {
            eta_bs,
            eta_ant: T::one() - eta_bs,
            eta_user,
            alpha,
            rho_ul: T::zero(),
            rho_dl: T::zero(),
            upsilon_pa: eta_bs,
            upsilon_pr: eta_user,
        }
    }

    pub fn with_powers(mut self, rho_ul: T, rho_dl: T) -> Self {
        self.rho_ul = rho_ul;
        self.rho_dl = rho_dl;
        self
    }

    pub fn with_association(mut self, upsilon_pa: T) -> Self {
        self.upsilon_pa = upsilon_pa;
        self
    }

    pub fn with_pilots(mut self, upsilon_pr: T) -> Self {
        self.upsilon_pr = upsilon_pr;
        self
    }

    /// Checks every range constraint, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eta_bs", self.eta_bs),
            ("eta_ant", self.eta_ant),
            ("eta_user", self.eta_user),
            ("alpha", self.alpha),
            ("rho_ul", self.rho_ul),
            ("rho_dl", self.rho_dl),
            ("upsilon_pa", self.upsilon_pa),
            ("upsilon_pr", self.upsilon_pr),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        for (name, v) in [
            ("eta_bs", self.eta_bs),
            ("eta_ant", self.eta_ant),
            ("eta_user", self.eta_user),
        ] {
            if v < T::zero() || v > T::one() {
                return Err(invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        let split = (self.eta_bs + self.eta_ant - T::one()).abs();
        if split.as_f64() > SPLIT_TOLERANCE {
            return Err(invalid(
                "eta_ant",
                format!(
                    "eta_bs + eta_ant must equal 1, got {}",
                    self.eta_bs + self.eta_ant
                ),
            ));
        }
        if self.alpha.as_f64() <= 2.0 + PATHLOSS_MARGIN {
            return Err(invalid(
                "alpha",
                format!("pathloss exponent must exceed 2, got {}", self.alpha),
            ));
        }
        if self.upsilon_pa < T::zero() || self.upsilon_pa > self.eta_bs {
            return Err(invalid(
                "upsilon_pa",
                format!("must lie in [0, eta_bs = {}], got {}", self.eta_bs, self.upsilon_pa),
            ));
        }
        if self.upsilon_pr < T::zero() || self.upsilon_pr > self.eta_user {
            return Err(invalid(
                "upsilon_pr",
                format!(
                    "must lie in [0, eta_user = {}], got {}",
                    self.eta_user, self.upsilon_pr
                ),
            ));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn half_alpha(&self) -> T {
        self.alpha / T::lit(2.0)
    }

    #[inline]
    pub fn partial_association(&self) -> bool {
        self.upsilon_pa < self.eta_bs
    }

    #[inline]
    pub fn pilot_reuse(&self) -> bool {
        self.upsilon_pr < self.eta_user
    }

    /// Converts between scalar types, e.g. to run the `f32` engine on `f64`
    /// inputs.
    pub fn cast<U: Real>(&self) -> ScalingParams<U> {
        let c = |x: T| U::lit(x.as_f64());
        ScalingParams {
            eta_bs: c(self.eta_bs),
            eta_ant: c(self.eta_ant),
            eta_user: c(self.eta_user),
            alpha: c(self.alpha),
            rho_ul: c(self.rho_ul),
            rho_dl: c(self.rho_dl),
            upsilon_pa: c(self.upsilon_pa),
            upsilon_pr: c(self.upsilon_pr),
        }
    }
}

/// UL-power regime, ordered from least to most accurate CSI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    /// Low.
    L,
    /// Medium.
    M,
    /// High.
    H,
    /// Extremely high.
    EH,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::L, Regime::M, Regime::H, Regime::EH];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::L => "L",
            Regime::M => "M",
            Regime::H => "H",
            Regime::EH => "EH",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Downlink cooperative operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperationKind {
    /// Interference-free benchmark: MRT signal, interference removed.
    If,
    /// Maximum ratio transmission.
    Mrt,
    /// Zero forcing.
    Zf,
}

impl OperationKind {
    pub const ALL: [OperationKind; 3] = [OperationKind::If, OperationKind::Mrt, OperationKind::Zf];

    pub fn as_str(self) -> &'static str {
        match self {
            OperationKind::If => "if",
            OperationKind::Mrt => "mrt",
            OperationKind::Zf => "zf",
        }
    }
}

impl fmt::Display for OperationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "if" => Ok(OperationKind::If),
            "mrt" => Ok(OperationKind::Mrt),
            "zf" => Ok(OperationKind::Zf),
            other => Err(invalid("operation", format!("unknown operation `{other}`"))),
        }
    }
}
