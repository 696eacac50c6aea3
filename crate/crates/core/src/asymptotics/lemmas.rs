//! Numerical oracles for the order-of-growth results behind the exponents.

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{median, ExponentFit, StatisticKind};
use crate::error::{invalid, Error, Result};
use crate::real::Real;
use crate::rng::{purpose, stream, StreamRng};

const QUAD_REL_TOL: f64 = 1e-10;
const QUAD_MAX_DEPTH: u32 = 48;

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    if depth == 0 || !err.is_finite() {
        *worst = worst.max(err.abs());
        return left + right;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst)
}

/// Adaptive Simpson quadrature to a relative tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    if !whole.is_finite() {
        return Err(Error::QuadratureNonConvergence { estimate: f64::INFINITY });
    }
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    let mut worst = 0.0;
    let value = simpson_step(&f, a, b, fa, fm, fb, whole, tol, QUAD_MAX_DEPTH, &mut worst);
    if worst > 0.0 || !value.is_finite() {
        return Err(Error::QuadratureNonConvergence { estimate: worst });
    }
    Ok(value)
}

/// Predicted order of `Σ_{k≤n} h(x_k)` for i.i.d. `x_k` with quantile `F^{-1}`:
/// `ln n ∫_0^1 n^t h(F^{-1}(n^{t-1})) dt`, which equals
/// `n ∫_{F^{-1}(1/n)}^{F^{-1}(1)} h dF`.
pub fn lemma1_prediction<Q, H>(quantile: Q, h: H, n: f64) -> Result<f64>
where
    Q: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    if !(n > 1.0) || !n.is_finite() {
        return Err(invalid("n", "must be finite and greater than 1"));
    }
    let ln_n = n.ln();
    let g = |t: f64| (t * ln_n).exp() * h(quantile(((t - 1.0) * ln_n).exp()));
    Ok(ln_n * integrate(g, 0.0, 1.0, QUAD_REL_TOL)?)
}

/// Quantile of the distance from the center to a uniform point on a disk.
pub fn disk_radius_quantile(radius: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x| radius * x.sqrt()
}

/// Distance from the center to a uniform point on a disk.
pub fn disk_radius_sampler(radius: f64) -> impl Fn(&mut StreamRng) -> f64 + Sync {
    move |rng| radius * f64::sample_unit(rng).sqrt()
}

/// `max(b, x)^{-α}`; `b = 0` is the unbounded model.
pub fn clipped_pathloss(alpha: f64, b: f64) -> impl Fn(f64) -> f64 + Sync {
    move |x| x.max(b).powf(-alpha)
}

fn fit_medians(
    xs: &[f64],
    samples: Vec<Vec<f64>>,
    statistic: StatisticKind,
) -> Result<ExponentFit> {
    let mut excluded = 0;
    let mut meds = Vec::with_capacity(xs.len());
    for (i, vals) in samples.into_iter().enumerate() {
        let total = vals.len();
        let good: Vec<f64> = vals.into_iter().filter(|v| v.is_finite() && *v > 0.0).collect();
        excluded += total - good.len();
        meds.push(median(&good).ok_or(Error::InsufficientPoints { index: i, n: xs[i] })?);
    }
    let mut fit = ExponentFit::fit(xs, &meds, statistic)?;
    fit.excluded = excluded;
    Ok(fit)
}

fn trial_grid<F>(len: usize, trials: usize, seed: u64, f: F) -> Vec<Vec<f64>>
where
    F: Fn(usize, &mut StreamRng) -> f64 + Sync,
{
    (0..len)
        .map(|gi| {
            (0..trials)
                .into_par_iter()
                .map(|t| f(gi, &mut stream(seed, &[purpose::ORACLE, gi as u64, t as u64])))
                .collect()
        })
        .collect()
}

fn check_grid(grid: &[f64], field: &'static str) -> Result<()> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) || !(grid[0] > 0.0) {
        return Err(invalid(field, "need at least two positive, strictly increasing values"));
    }
    Ok(())
}

/// Median of `Σ_{k≤n} h(x_k)` over trials at each `n`, fitted against `n`.
pub fn lemma1_empirical<S, H>(
    sampler: S,
    h: H,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ExponentFit>
where
    S: Fn(&mut StreamRng) -> f64 + Sync,
    H: Fn(f64) -> f64 + Sync,
{
    let xs: Vec<f64> = n_grid.iter().map(|&n| n as f64).collect();
    check_grid(&xs, "n_grid")?;
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let samples = trial_grid(n_grid.len(), trials, seed, |gi, rng| {
        (0..n_grid[gi]).map(|_| h(sampler(rng))).sum()
    });
    fit_medians(&xs, samples, StatisticKind::Custom)
}

/// Piecewise-linear function given by its knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() || knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(invalid("knots", "need at least one finite knot"));
        }
        if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(invalid("knots", "abscissae must be strictly increasing"));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn eval(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if t < lo || t > hi {
            return None;
        }
        if self.knots.len() == 1 {
            return Some(self.knots[0].1);
        }
        let i = self.knots.partition_point(|k| k.0 <= t).clamp(1, self.knots.len() - 1);
        let (t0, v0) = self.knots[i - 1];
        let (t1, v1) = self.knots[i];
        Some(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }
}

/// `sup_t { growth(t) - 2 p t }` over `[t_min, t_max]`.
///
/// `growth(t)` is the exponent of `|X_t|` and `h(F^{-1}(x)) = Θ(x^{-p})`. The
/// value term assumes a planar distance law `F(x) ~ x²`, so `h(n^t)` has
/// exponent `-2pt`. The objective is piecewise linear, so the supremum is
/// attained at an endpoint or a knot and is evaluated exactly there. `p = 0`
/// is accepted for constant `h`.
pub fn corollary1_sup(p: f64, growth: &PiecewiseLinear, t_min: f64, t_max: f64) -> Result<f64> {
    if !p.is_finite() || p < 0.0 {
        return Err(invalid("p", "must be finite and non-negative"));
    }
    if !(t_min <= t_max) {
        return Err(invalid("t_range", "t_min must not exceed t_max"));
    }
    let (lo, hi) = growth.domain();
    if t_min < lo || t_max > hi {
        return Err(invalid("t_range", "growth function does not cover the range"));
    }
    let value = |t: f64| growth.eval(t).expect("inside domain") - 2.0 * p * t;
    let inner = growth
        .knots()
        .iter()
        .map(|k| k.0)
        .filter(|&t| t > t_min && t < t_max);
    Ok([t_min, t_max]
        .into_iter()
        .chain(inner)
        .map(value)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `d2^{-α/2}` with cheap paths for integer `α`.
#[derive(Debug, Clone, Copy)]
enum InversePower {
    Even(i32),
    Odd(i32),
    General(f64),
}

impl InversePower {
    fn new(alpha: f64) -> Self {
        if alpha.fract() == 0.0 && alpha < 64.0 {
            let a = alpha as i32;
            if a % 2 == 0 {
                InversePower::Even(a / 2)
            } else {
                InversePower::Odd(a / 2)
            }
        } else {
            InversePower::General(-0.5 * alpha)
        }
    }

    #[inline]
    fn of_squared(self, d2: f64) -> f64 {
        match self {
            InversePower::Even(k) => d2.powi(k).recip(),
            InversePower::Odd(k) => (d2.powi(k) * d2.sqrt()).recip(),
            InversePower::General(e) => d2.powf(e),
        }
    }
}

fn unit_disk_point(rng: &mut StreamRng) -> [f64; 2] {
    let r = f64::sample_unit(rng).sqrt();
    let th = std::f64::consts::TAU * f64::sample_unit(rng);
    [r * th.cos(), r * th.sin()]
}

/// Homogeneous PPP of the given intensity on the unit disk.
fn unit_disk_ppp(rng: &mut StreamRng, intensity: f64) -> Vec<[f64; 2]> {
    let mean = intensity * std::f64::consts::PI;
    let count = if mean > 0.0 {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    } else {
        0
    };
    (0..count).map(|_| unit_disk_point(rng)).collect()
}

#[inline]
fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn check_alpha(alpha: f64, field: &'static str) -> Result<()> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(invalid(field, "must be finite and greater than 2"));
    }
    Ok(())
}

/// Median of `Σ_{X∈Φ} |X - Y0|^{-α}` for a PPP `Φ` of intensity `λ` on the
/// unit disk and a uniform `Y0`, fitted against `λ`. Empty draws are excluded.
pub fn lemma2_part1(lambda_grid: &[f64], alpha: f64, trials: usize, seed: u64) -> Result<ExponentFit> {
    check_alpha(alpha, "alpha")?;
    check_grid(lambda_grid, "lambda_grid")?;
    if trials == 0 {
        return Err(invalid("trials", "must be positive"));
    }
    let pw = InversePower::new(alpha);
    let samples = trial_grid(lambda_grid.len(), trials, seed, |gi, rng| {
        let y0 = unit_disk_point(rng);
        unit_disk_ppp(rng, lambda_grid[gi])
            .into_iter()
            .map(|x| pw.of_squared(dist2(x, y0)))
            .sum()
    });
    fit_medians(lambda_grid, samples, StatisticKind::Custom)
}

/// Growth exponents `(s, t)` of the separated and shared double sums.
///
/// Both branches are taken as printed. At `δ = 1` every condition for `t` is
/// strict and fails, so `t = -∞` there.
pub fn lemma2_part2_prediction(alpha0: f64, alpha1: f64, delta: f64, z: f64) -> Result<(f64, f64)> {
    check_alpha(alpha0, "alpha0")?;
    check_alpha(alpha1, "alpha1")?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid("delta", "must be finite and positive"));
    }
    if !z.is_finite() {
        return Err(invalid("z", "must be finite"));
    }
    let hi = alpha0.max(alpha1);
    let lo = alpha0.min(alpha1);
    let s = if delta < 1.0 {
        if z < -0.5 {
            hi / 2.0 + lo / 2.0 * delta
        } else if z < -0.5 * delta {
            1.0 + (2.0 - hi) * z + lo / 2.0 * delta
        } else {
            1.0 + delta + (4.0 - hi - lo) * z
        }
    } else if z < -0.5 {
        (hi + lo) / 2.0 + delta - 1.0
    } else {
        1.0 + delta + (4.0 - hi - lo) * z
    };
    let half_delta = -0.5 * delta;
    let t = if z > half_delta && half_delta > -0.5 {
        hi / 2.0 + lo / 2.0 * delta
    } else if z > -0.5 && -0.5 > half_delta {
        (hi + lo) / 2.0 + delta - 1.0
    } else if half_delta < z && z < -0.5 {
        (hi + lo) / 2.0 + delta + 2.0 * z
    } else {
        f64::NEG_INFINITY
    };
    Ok((s, t))
}

pub const DEFAULT_EXCLUSION_SCALE: f64 = 0.25;

/// Sampling plan for the separated double sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleSumPlan {
    pub alpha0: f64,
    pub alpha1: f64,
    pub delta: f64,
    pub z: f64,
    pub lambda_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Points within `c λ^z` of `Y0` or of `Y` are left out.
    pub exclusion_scale: f64,
}

impl DoubleSumPlan {
    pub fn validate(&self) -> Result<()> {
        lemma2_part2_prediction(self.alpha0, self.alpha1, self.delta, self.z)?;
        check_grid(&self.lambda_grid, "lambda_grid")?;
        if self.trials == 0 {
            return Err(invalid("trials", "must be positive"));
        }
        if !(self.exclusion_scale > 0.0) || !self.exclusion_scale.is_finite() {
            return Err(invalid("exclusion_scale", "must be finite and positive"));
        }
        Ok(())
    }
}

/// One draw of `Σ_{Y∈Ψ} Σ_X |X - Y0|^{-α0} |X - Y|^{-α1}` over `X ∈ Φ` outside
/// both exclusion disks, with `Φ` of intensity `λ` and `Ψ` of intensity `λ^δ`.
fn separated_double_sum(plan: &DoubleSumPlan, lambda: f64, rng: &mut StreamRng) -> f64 {
    let y0 = unit_disk_point(rng);
    let phi = unit_disk_ppp(rng, lambda);
    let psi = unit_disk_ppp(rng, lambda.powf(plan.delta));
    let r = plan.exclusion_scale * lambda.powf(plan.z);
    let r2 = r * r;
    let p0 = InversePower::new(plan.alpha0);
    let p1 = InversePower::new(plan.alpha1);

    let mut xs = Vec::with_capacity(phi.len());
    let mut ys = Vec::with_capacity(phi.len());
    let mut w0 = Vec::with_capacity(phi.len());
    for x in phi {
        let d2 = dist2(x, y0);
        if d2 > r2 {
            xs.push(x[0]);
            ys.push(x[1]);
            w0.push(p0.of_squared(d2));
        }
    }
    let mut total = 0.0;
    for y in psi {
        let mut acc = 0.0;
        for i in 0..xs.len() {
            let dx = xs[i] - y[0];
            let dy = ys[i] - y[1];
            let d2 = dx * dx + dy * dy;
            if d2 > r2 {
                acc += w0[i] * p1.of_squared(d2);
            }
        }
        total += acc;
    }
    total
}

/// Median separated double sum over trials at each `λ`, fitted against `λ`.
pub fn lemma2_part2_empirical(plan: &DoubleSumPlan) -> Result<ExponentFit> {
    plan.validate()?;
    let samples = trial_grid(plan.lambda_grid.len(), plan.trials, plan.seed, |gi, rng| {
        separated_double_sum(plan, plan.lambda_grid[gi], rng)
    });
    fit_medians(&plan.lambda_grid, samples, StatisticKind::Custom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_polynomial_and_exp() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap();
        assert!((v - 9.0).abs() < 1e-10);
        let v = integrate(f64::exp, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn quadrature_reports_failure() {
        let e = integrate(|x: f64| 1.0 / x, 0.0, 1.0, 1e-12);
        assert!(matches!(e, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn constant_h_gives_n() {
        let v = lemma1_prediction(disk_radius_quantile(1.0), |_| 1.0, 1e6).unwrap();
        assert!((v - (1e6 - 1.0)).abs() < 1e-3);
    }

    #[test]
    fn example1_closed_form() {
        let n = 4096.0;
        let v = lemma1_prediction(disk_radius_quantile(1.0), clipped_pathloss(3.0, 0.0), n).unwrap();
        let exact = 2.0 * n.powf(1.5) * (1.0 - n.powf(-0.5));
        assert!((v / exact - 1.0).abs() < 1e-8);
    }

    #[test]
    fn piecewise_eval() {
        let g = PiecewiseLinear::new(vec![(-0.5, 0.0), (0.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(g.eval(-0.25), Some(0.5));
        assert_eq!(g.eval(0.5), Some(1.0));
        assert_eq!(g.eval(0.0), Some(1.0));
        assert_eq!(g.eval(1.5), None);
        assert!(PiecewiseLinear::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
    }

    #[test]
    fn corollary_examples() {
        let g = PiecewiseLinear::new(vec![(-0.5, 0.0), (0.0, 1.0)]).unwrap();
        assert_eq!(corollary1_sup(1.5, &g, -0.5, 0.0).unwrap(), 1.5);
        assert_eq!(corollary1_sup(2.0, &g, -0.5, 0.0).unwrap(), 2.0);
        assert_eq!(corollary1_sup(0.0, &g, -0.5, 0.0).unwrap(), 1.0);
        assert!(corollary1_sup(1.0, &g, -1.0, 0.0).is_err());
    }

    #[test]
    fn inverse_power_paths() {
        for a in [3.0, 4.0, 2.5, 5.0] {
            let p = InversePower::new(a);
            let d2: f64 = 0.37;
            assert!((p.of_squared(d2) / d2.powf(-a / 2.0) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn part2_branches() {
        let (s, _) = lemma2_part2_prediction(4.0, 4.0, 1.0, -1.0).unwrap();
        assert_eq!(s, 4.0);
        let (s, t) = lemma2_part2_prediction(4.0, 3.0, 0.5, 0.0).unwrap();
        assert_eq!(s, 1.5);
        assert_eq!(t, 2.0 + 1.5 * 0.5);
        assert_eq!(lemma2_part2_prediction(4.0, 3.0, 1.0, 0.0).unwrap().1, f64::NEG_INFINITY);
        assert!(lemma2_part2_prediction(2.0, 3.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn ppp_mean_count() {
        let mut rng = stream(1, &[]);
        let total: usize = (0..200).map(|_| unit_disk_ppp(&mut rng, 50.0).len()).sum();
        let mean = total as f64 / 200.0;
        let expect = 50.0 * std::f64::consts::PI;
        assert!((mean - expect).abs() < 4.0 * (expect / 200.0).sqrt());
    }
}
