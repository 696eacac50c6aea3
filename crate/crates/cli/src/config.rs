//! Run configuration: a JSON file merged under command-line flags.

use std::path::{Path, PathBuf};

use lscran::network::UserSelection;
use lscran::{OperationKind, ScalingParams64};
use serde::Deserialize;

use crate::error::CliError;

/// Everything a config file may set. Unset keys fall back to flags or
/// defaults; flags always win.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub eta_bs: Option<f64>,
    pub eta_ant: Option<f64>,
    pub eta_user: Option<f64>,
    pub rho_ul: Option<f64>,
    pub rho_dl: Option<f64>,
    pub upsilon_pa: Option<f64>,
    pub upsilon_pr: Option<f64>,
    pub operations: Option<Vec<OperationKind>>,
    pub rho_range: Option<[f64; 2]>,
    pub rho_steps: Option<usize>,
    pub tau_range: Option<[f64; 2]>,
    pub tau_steps: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub genie_csi: Option<bool>,
    pub user_selection: Option<UserSelection>,
    pub quick: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad config {}: {e}", path.display())))
    }
}

/// Scaling-parameter flags shared by every subcommand.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ParamArgs {
    /// Pathloss exponent (> 2)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// BS-count exponent
    #[arg(long)]
    pub eta_bs: Option<f64>,
    /// Antenna-count exponent; defaults to 1 - eta_bs
    #[arg(long)]
    pub eta_ant: Option<f64>,
    /// User-count exponent
    #[arg(long)]
    pub eta_user: Option<f64>,
    /// UL power exponent
    #[arg(long, allow_hyphen_values = true)]
    pub rho_ul: Option<f64>,
    /// DL power exponent
    #[arg(long, allow_hyphen_values = true)]
    pub rho_dl: Option<f64>,
    /// Associated-BS exponent; defaults to eta_bs (full association)
    #[arg(long)]
    pub upsilon_pa: Option<f64>,
    /// Pilot-count exponent; defaults to eta_user (no reuse)
    #[arg(long)]
    pub upsilon_pr: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self, cfg: &RunConfig) -> Result<ScalingParams64, CliError> {
        let pick = |flag: Option<f64>, file: Option<f64>| flag.or(file);
        let alpha = pick(self.alpha, cfg.alpha).unwrap_or(4.0);
        let eta_bs = pick(self.eta_bs, cfg.eta_bs).unwrap_or(0.5);
        let eta_user = pick(self.eta_user, cfg.eta_user).unwrap_or(0.5);
        let mut p = ScalingParams64::new(alpha, eta_bs, eta_user);
        if let Some(v) = pick(self.eta_ant, cfg.eta_ant) {
            p.eta_ant = v;
        }
        p.rho_ul = pick(self.rho_ul, cfg.rho_ul).unwrap_or(0.0);
        p.rho_dl = pick(self.rho_dl, cfg.rho_dl).unwrap_or(0.0);
        p.upsilon_pa = pick(self.upsilon_pa, cfg.upsilon_pa).unwrap_or(eta_bs);
        p.upsilon_pr = pick(self.upsilon_pr, cfg.upsilon_pr).unwrap_or(eta_user);
        p.validate()?;
        Ok(p)
    }
}

pub fn resolve_operations(
    flags: &[OperationKind],
    cfg: &RunConfig,
) -> Vec<OperationKind> {
    if !flags.is_empty() {
        let mut ops = flags.to_vec();
        ops.dedup();
        return ops;
    }
    cfg.operations
        .clone()
        .unwrap_or_else(|| OperationKind::ALL.to_vec())
}

/// Worker count: flag or environment, then config file, then the machine.
pub fn resolve_workers(flag: Option<usize>, cfg: &RunConfig) -> Result<usize, CliError> {
    let w = flag.or(cfg.workers).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    if w == 0 {
        return Err(CliError::Validation("workers must be positive".into()));
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let cfg: RunConfig = serde_json::from_str(r#"{"alpha": 3.0, "eta_bs": 0.4, "rho_ul": -1}"#).unwrap();
        let flags = ParamArgs {
            alpha: Some(5.0),
            ..Default::default()
        };
        let p = flags.resolve(&cfg).unwrap();
        assert_eq!(p.alpha, 5.0);
        assert_eq!(p.eta_bs, 0.4);
        assert!((p.eta_ant - 0.6).abs() < 1e-15);
        assert_eq!(p.rho_ul, -1.0);
        assert_eq!(p.upsilon_pa, 0.4);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"alpah": 3.0}"#).is_err());
    }

    #[test]
    fn invalid_params_are_validation_errors() {
        let flags = ParamArgs {
            alpha: Some(2.0),
            ..Default::default()
        };
        let e = flags.resolve(&RunConfig::default()).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
