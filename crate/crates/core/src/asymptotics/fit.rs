use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticKind {
    Snr,
    Sir,
    Sinr,
    Custom,
}

impl StatisticKind {
    pub const LINK: [StatisticKind; 3] = [StatisticKind::Snr, StatisticKind::Sir, StatisticKind::Sinr];

    pub fn as_str(self) -> &'static str {
        match self {
            StatisticKind::Snr => "snr",
            StatisticKind::Sir => "sir",
            StatisticKind::Sinr => "sinr",
            StatisticKind::Custom => "custom",
        }
    }
}

impl std::fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Least-squares line through `(ln x, ln y)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
    pub statistic: StatisticKind,
    /// Trials dropped before taking medians.
    pub excluded: usize,
}

impl ExponentFit {
    /// OLS on points already in log space.
    pub fn from_log_points(points: Vec<(f64, f64)>, statistic: StatisticKind) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("points", "need at least two points to fit a slope"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(invalid("points", "non-finite coordinate"));
        }
        let n = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            return Err(invalid("points", "all abscissae coincide"));
        }
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let ss_res: f64 = points
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        let r_squared = if ss_tot > 0.0 {
            (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
        } else {
            1.0
        };
        Ok(Self {
            slope,
            intercept,
            r_squared,
            points,
            statistic,
            excluded: 0,
        })
    }

    /// Fits `ln y` against `ln x`; both must be positive.
    pub fn fit(xs: &[f64], ys: &[f64], statistic: StatisticKind) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid("points", "x and y lengths differ"));
        }
        if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
            return Err(invalid("points", "log-log fit needs positive values"));
        }
        let pts = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
        Self::from_log_points(pts, statistic)
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p.1 - self.intercept - self.slope * p.0)
            .collect()
    }

    /// Slopes between consecutive points.
    pub fn local_slopes(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }
}

/// Median of the values; the mean of the middle pair for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let xs: Vec<f64> = (8..14).map(|k| 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(1.25)).collect();
        let f = ExponentFit::fit(&xs, &ys, StatisticKind::Custom).unwrap();
        assert!((f.slope - 1.25).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert_eq!(f.r_squared, 1.0);
        assert!(f.local_slopes().iter().all(|s| (s - 1.25).abs() < 1e-12));
    }

    #[test]
    fn flat_series() {
        let f = ExponentFit::fit(&[1.0, 2.0, 4.0], &[5.0, 5.0, 5.0], StatisticKind::Snr).unwrap();
        assert_eq!(f.slope, 0.0);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExponentFit::fit(&[1.0], &[1.0], StatisticKind::Snr).is_err());
        assert!(ExponentFit::fit(&[1.0, 2.0], &[1.0, 0.0], StatisticKind::Snr).is_err());
        assert!(ExponentFit::fit(&[2.0, 2.0], &[1.0, 3.0], StatisticKind::Snr).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
