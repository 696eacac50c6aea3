//! Lemma-oracle battery behind `lscran verify`.

use std::fmt;

use lscran::asymptotics::{
    clipped_pathloss, corollary1_sup, disk_radius_quantile, disk_radius_sampler, lemma1_empirical,
    lemma1_prediction, lemma2_part1, lemma2_part2_empirical, lemma2_part2_prediction,
    DoubleSumPlan, ExponentFit, PiecewiseLinear, DEFAULT_EXCLUSION_SCALE,
};
use lscran::rng::derive_seed;

use crate::error::CliError;

pub const QUICK_TOLERANCE: f64 = 0.25;
pub const MIN_R_SQUARED: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub alphas: Vec<f64>,
    pub quick: bool,
    pub seed: u64,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            alphas: vec![3.0, 4.0],
            quick: false,
            seed: 2024,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub r_squared: Option<f64>,
    pub passed: bool,
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: value {:.6} expected {:.6} tol {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.expected,
            self.tolerance
        )?;
        if let Some(r2) = self.r_squared {
            write!(f, " r2 {r2:.4}")?;
        }
        Ok(())
    }
}

fn exact(name: String, value: f64, expected: f64, tolerance: f64) -> OracleCheck {
    let passed = if expected.is_infinite() {
        value == expected
    } else {
        (value - expected).abs() <= tolerance
    };
    OracleCheck {
        name,
        value,
        expected,
        tolerance,
        r_squared: None,
        passed,
    }
}

fn slope_check(name: String, fit: &ExponentFit, expected: f64, tolerance: f64) -> OracleCheck {
    OracleCheck {
        name,
        value: fit.slope,
        expected,
        tolerance,
        r_squared: Some(fit.r_squared),
        passed: (fit.slope - expected).abs() <= tolerance && fit.r_squared >= MIN_R_SQUARED,
    }
}

fn geometric(lo_pow: i32, hi_pow: i32) -> Vec<f64> {
    (lo_pow..=hi_pow).map(|k| 2f64.powi(k)).collect()
}

/// Corollary 1 with the Example 1 encoding: `|X_t| ~ n^{2t+1}` on `[-1/2, 0]`.
pub fn corollary_checks(alphas: &[f64]) -> Result<Vec<OracleCheck>, CliError> {
    let growth = PiecewiseLinear::new(vec![(-0.5, 0.0), (0.0, 1.0)])?;
    let mut out = Vec::new();
    for &a in alphas {
        let v = corollary1_sup(a / 2.0, &growth, -0.5, 0.0)?;
        out.push(exact(format!("corollary1 example1 alpha={a}"), v, a / 2.0, 0.0));
    }
    let v = corollary1_sup(0.0, &growth, -0.5, 0.0)?;
    out.push(exact("corollary1 constant h".into(), v, 1.0, 0.0));
    Ok(out)
}

/// Ratio tests on the pathloss-sum growth prediction.
pub fn lemma1_prediction_checks(alphas: &[f64]) -> Result<Vec<OracleCheck>, CliError> {
    let n = 1e6;
    let q = disk_radius_quantile(1.0);
    let mut out = Vec::new();
    let flat = lemma1_prediction(&q, |_| 1.0, n)?;
    out.push(exact("lemma1 prediction constant h / n".into(), flat / n, 1.0, 0.01));
    for &a in alphas {
        let h = clipped_pathloss(a, 0.0);
        let r = lemma1_prediction(&q, &h, 2.0 * n)? / lemma1_prediction(&q, &h, n)?;
        let target = 2f64.powf(a / 2.0);
        out.push(exact(format!("lemma1 prediction ratio alpha={a} b=0"), r / target, 1.0, 0.01));
        let h = clipped_pathloss(a, 0.05);
        let r = lemma1_prediction(&q, &h, 2.0 * n)? / lemma1_prediction(&q, &h, n)?;
        out.push(exact(format!("lemma1 prediction ratio alpha={a} b=0.05"), r / 2.0, 1.0, 0.01));
    }
    Ok(out)
}

pub fn lemma2_prediction_checks() -> Result<Vec<OracleCheck>, CliError> {
    let (s, _) = lemma2_part2_prediction(4.0, 4.0, 1.0, -1.0)?;
    let (s2, _) = lemma2_part2_prediction(4.0, 3.0, 0.5, 0.0)?;
    let (_, t) = lemma2_part2_prediction(4.0, 3.0, 1.0, 0.0)?;
    Ok(vec![
        exact("lemma2 s alpha=(4,4) delta=1 z=-1".into(), s, 4.0, 1e-12),
        exact("lemma2 s alpha=(4,3) delta=0.5 z=0".into(), s2, 1.5, 1e-12),
        exact("lemma2 t alpha=(4,3) delta=1 z=0".into(), t, f64::NEG_INFINITY, 0.0),
    ])
}

/// Points at which the separated double sum is sampled.
pub const DOUBLE_SUM_POINTS: [(f64, f64); 6] = [
    (0.5, -0.6),
    (0.5, -0.25),
    (0.5, 0.0),
    (1.0, -0.6),
    (1.0, -0.25),
    (1.0, 0.0),
];

pub fn lemma_empirical_checks(opts: &VerifyOptions) -> Result<Vec<OracleCheck>, CliError> {
    let widen = |tol: f64| if opts.quick { tol.max(QUICK_TOLERANCE) } else { tol };
    let trials = if opts.quick { 40 } else { 200 };
    let mut out = Vec::new();

    let n_grid: Vec<usize> = (8..=14).map(|k| 1usize << k).collect();
    for &a in &opts.alphas {
        let fit = lemma1_empirical(
            disk_radius_sampler(1.0),
            clipped_pathloss(a, 0.0),
            &n_grid,
            trials,
            derive_seed(opts.seed, &[1, a.to_bits()]),
        )?;
        out.push(slope_check(format!("lemma1 empirical alpha={a}"), &fit, a / 2.0, widen(0.1)));
    }
    let fit = lemma1_empirical(disk_radius_sampler(1.0), |_| 1.0, &n_grid, trials, opts.seed)?;
    out.push(slope_check("lemma1 empirical constant h".into(), &fit, 1.0, widen(0.05)));

    let lambdas = geometric(6, 12);
    for &a in &opts.alphas {
        let tol = if a < 3.0 { 0.15 } else { 0.1 };
        let fit = lemma2_part1(&lambdas, a, trials, derive_seed(opts.seed, &[2, a.to_bits()]))?;
        out.push(slope_check(format!("lemma2 part1 alpha={a}"), &fit, a / 2.0, widen(tol)));
    }

    let (alpha0, alpha1) = (4.0, 3.0);
    for (i, &(delta, z)) in DOUBLE_SUM_POINTS.iter().enumerate() {
        let (s, _) = lemma2_part2_prediction(alpha0, alpha1, delta, z)?;
        let plan = DoubleSumPlan {
            alpha0,
            alpha1,
            delta,
            z,
            lambda_grid: geometric(7, 11),
            trials: 60,
            seed: derive_seed(opts.seed, &[3, i as u64]),
            exclusion_scale: DEFAULT_EXCLUSION_SCALE,
        };
        let fit = lemma2_part2_empirical(&plan)?;
        out.push(slope_check(
            format!("lemma2 part2 empirical delta={delta} z={z}"),
            &fit,
            s,
            widen(0.2),
        ));
    }
    Ok(out)
}

/// Runs every oracle on a pool of `opts.workers` threads.
pub fn run_verify(opts: &VerifyOptions) -> Result<Vec<OracleCheck>, CliError> {
    if opts.alphas.iter().any(|&a| !(a > 2.0)) {
        return Err(CliError::Validation("alpha must exceed 2".into()));
    }
    let pool = rayon_pool(opts.workers)?;
    pool.install(|| {
        let mut all = corollary_checks(&opts.alphas)?;
        all.extend(lemma1_prediction_checks(&opts.alphas)?);
        all.extend(lemma2_prediction_checks()?);
        all.extend(lemma_empirical_checks(opts)?);
        Ok(all)
    })
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}
