//! Precoding, DL power allocation and link metrics of the typical user.
//!
//! Noise power is 1, so every power is relative to noise. Precoders are stored
//! as an `N x K` column-major matrix whose column `j` stacks `f_lj` over all
//! BSs, zero where `l` is not associated with `j`.

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;

use crate::channel::{ChannelRealization, EstimatedChannels, C};
use crate::error::{Error, Result};
use crate::exponent::OperationKind;
use crate::network::NetworkInstance;
use crate::real::Real;

/// Gram systems with a 1-norm condition number above this are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Scalar usable by the ZF solver.
pub trait LinalgReal: Real + RealField {}
impl<T: Real + RealField> LinalgReal for T {}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder<T> {
    pub operation: OperationKind,
    pub n: usize,
    pub k: usize,
    pub f: Vec<C<T>>,
}

impl<T: Real> Precoder<T> {
    #[inline]
    pub fn column(&self, j: usize) -> &[C<T>] {
        &self.f[j * self.n..(j + 1) * self.n]
    }

    /// `Σ_l ‖f_lj‖²` for every user.
    pub fn column_norms(&self) -> Vec<T> {
        (0..self.k).map(|j| norm_sqr(self.column(j))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics<T> {
    pub snr: T,
    pub sir: T,
    pub sinr: T,
    pub psi_kk: Complex<T>,
    pub interference: T,
    pub q: Vec<T>,
}

impl<T: Real> LinkMetrics<T> {
    fn from_parts(signal: T, interference: T, psi_kk: Complex<T>, q: Vec<T>) -> Self {
        let sir = if interference > T::zero() {
            signal / interference
        } else {
            T::infinity()
        };
        Self {
            snr: signal,
            sir,
            sinr: signal / (interference + T::one()),
            psi_kk,
            interference,
            q,
        }
    }
}

#[inline]
fn norm_sqr<T: Real>(v: &[C<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// `a^H b`.
#[inline]
fn dotc<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    let mut re = T::zero();
    let mut im = T::zero();
    for (x, y) in a.iter().zip(b) {
        re = re + x.re * y.re + x.im * y.im;
        im = im + x.re * y.im - x.im * y.re;
    }
    C::new(re, im)
}

/// `Ĝ^H`: column `j` is `sqrt(β_lj) ĥ_lj` stacked over BSs.
fn matched_filter<T: Real>(est: &EstimatedChannels<T>, net: &NetworkInstance<T>) -> Vec<C<T>> {
    let (l_count, m) = (est.l, est.m);
    let mut f = est.h_hat.clone();
    for (j, set) in net.assoc.iter().enumerate() {
        for &l in set {
            let a = net.beta(l, j).sqrt();
            let start = (j * l_count + l) * m;
            for z in &mut f[start..start + m] {
                *z = *z * a;
            }
        }
    }
    f
}

/// Hermitian `F^H F`, filled from the lower triangle.
fn gram<T: LinalgReal>(f: &[C<T>], n: usize, k: usize) -> DMatrix<C<T>> {
    let mut g = DMatrix::from_element(k, k, C::new(T::zero(), T::zero()));
    for i in 0..k {
        let ci = &f[i * n..(i + 1) * n];
        for j in 0..=i {
            let v = dotc(ci, &f[j * n..(j + 1) * n]);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

fn norm1<T: LinalgReal>(a: &DMatrix<C<T>>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| Real::as_f64(z.norm())).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `(ĜĜ^H)^{-1}` by Cholesky, rejecting ill-conditioned systems.
fn zf_weights<T: LinalgReal>(f_mrt: &[C<T>], n: usize, k: usize) -> Result<DMatrix<C<T>>> {
    let g = gram(f_mrt, n, k);
    let chol = g.clone().cholesky().ok_or(Error::IllConditionedGram {
        condition: f64::INFINITY,
    })?;
    let w = chol.solve(&DMatrix::identity(k, k));
    let condition = norm1(&g) * norm1(&w);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::IllConditionedGram { condition });
    }
    Ok(w)
}

/// IF and MRT return `Ĝ^H`; ZF returns `Ĝ^H (ĜĜ^H)^{-1}`.
pub fn build_precoder<T: LinalgReal>(
    op: OperationKind,
    est: &EstimatedChannels<T>,
    net: &NetworkInstance<T>,
) -> Result<Precoder<T>> {
    let n = est.l * est.m;
    let k = est.k;
    let f_mrt = matched_filter(est, net);
    let f = match op {
        OperationKind::If | OperationKind::Mrt => f_mrt,
        OperationKind::Zf => {
            if n < k {
                return Err(Error::Dimension(format!("ZF needs N >= K, got N={n}, K={k}")));
            }
            let w = zf_weights(&f_mrt, n, k)?;
            let fm = DMatrix::from_column_slice(n, k, &f_mrt);
            (fm * w).as_slice().to_vec()
        }
    };
    Ok(Precoder {
        operation: op,
        n,
        k,
        f,
    })
}

/// `Q_j = p_dl / Σ_l ‖f_lj‖²`, so every user radiates exactly `p_dl`.
pub fn allocate_power<T: Real>(pre: &Precoder<T>, p_dl: T) -> Result<Vec<T>> {
    power_from_norms(&pre.column_norms(), p_dl)
}

fn power_from_norms<T: Real>(norms: &[T], p_dl: T) -> Result<Vec<T>> {
    norms
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            if s > T::zero() && s.is_finite() {
                Ok(p_dl / s)
            } else {
                Err(Error::ZeroNormPrecoder { user: j })
            }
        })
        .collect()
}

/// `ψ_kj = Σ_l g_lk^H f_lj` with the true channels, as a `K x K` matrix.
pub fn effective_channels<T: Real>(
    pre: &Precoder<T>,
    ch: &ChannelRealization<T>,
    net: &NetworkInstance<T>,
) -> Vec<Vec<C<T>>> {
    (0..pre.k)
        .map(|k| {
            let g = true_column(ch, net, k);
            (0..pre.k).map(|j| dotc(&g, pre.column(j))).collect()
        })
        .collect()
}

fn true_column<T: Real>(ch: &ChannelRealization<T>, net: &NetworkInstance<T>, k: usize) -> Vec<C<T>> {
    let m = ch.m;
    let mut g = ch.column(k).to_vec();
    for l in 0..ch.l {
        let a = net.beta(l, k).sqrt();
        for z in &mut g[l * m..(l + 1) * m] {
            *z = *z * a;
        }
    }
    g
}

/// Typical-user metrics for each requested operation on one realization.
///
/// Only the typical user's row of `ψ` is formed. For ZF the precoder is never
/// materialized: with `W = (ĜĜ^H)^{-1}`, the row is `(g^H Ĝ^H) W` and the
/// column norms are the diagonal of `W`.
pub fn measure_many<T: LinalgReal>(
    ops: &[OperationKind],
    net: &NetworkInstance<T>,
    ch: &ChannelRealization<T>,
    est: &EstimatedChannels<T>,
    p_dl: T,
) -> Result<Vec<LinkMetrics<T>>> {
    let n = est.l * est.m;
    let k = est.k;
    let u = net.typical_user;
    let f_mrt = matched_filter(est, net);
    let g = true_column(ch, net, u);
    let row_mrt: Vec<C<T>> = (0..k).map(|j| dotc(&g, &f_mrt[j * n..(j + 1) * n])).collect();

    let mut mrt_norms = None;
    let mut zf = None;
    let mut out = Vec::with_capacity(ops.len());
    for &op in ops {
        let (row, norms) = match op {
            OperationKind::If | OperationKind::Mrt => {
                let norms = mrt_norms.get_or_insert_with(|| {
                    (0..k).map(|j| norm_sqr(&f_mrt[j * n..(j + 1) * n])).collect::<Vec<T>>()
                });
                (row_mrt.clone(), norms.clone())
            }
            OperationKind::Zf => {
                if zf.is_none() {
                    if n < k {
                        return Err(Error::Dimension(format!("ZF needs N >= K, got N={n}, K={k}")));
                    }
                    let w = zf_weights(&f_mrt, n, k)?;
                    let r = DMatrix::from_row_slice(1, k, &row_mrt) * &w;
                    let norms: Vec<T> = (0..k).map(|j| w[(j, j)].re).collect();
                    zf = Some((r.as_slice().to_vec(), norms));
                }
                zf.clone().expect("zf computed")
            }
        };
        let q = power_from_norms(&norms, p_dl)?;
        out.push(link_metrics(op, &row, q, u));
    }
    Ok(out)
}

pub fn measure<T: LinalgReal>(
    op: OperationKind,
    net: &NetworkInstance<T>,
    ch: &ChannelRealization<T>,
    est: &EstimatedChannels<T>,
    p_dl: T,
) -> Result<LinkMetrics<T>> {
    Ok(measure_many(&[op], net, ch, est, p_dl)?.remove(0))
}

/// Metrics from one row of `ψ` and the allocated powers. IF drops the
/// interference term.
pub fn link_metrics<T: Real>(op: OperationKind, row: &[C<T>], q: Vec<T>, u: usize) -> LinkMetrics<T> {
    let psi_kk = row[u];
    let signal = q[u] * psi_kk.norm_sqr();
    let interference = if op == OperationKind::If {
        T::zero()
    } else {
        row.iter()
            .zip(&q)
            .enumerate()
            .filter(|(j, _)| *j != u)
            .fold(T::zero(), |acc, (_, (z, &qj))| acc + qj * z.norm_sqr())
    };
    LinkMetrics::from_parts(signal, interference, psi_kk, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channels, estimate};
    use crate::exponent::ScalingParams;
    use crate::network::{place_and_associate, NetworkConfig};

    fn setup(
        n: usize,
        p: ScalingParams<f64>,
    ) -> (NetworkInstance<f64>, ChannelRealization<f64>, EstimatedChannels<f64>) {
        let net = place_and_associate(&NetworkConfig::new(n, p, 13)).unwrap();
        let ch = draw_channels(&net, 14);
        let est = estimate(&net, &ch, 1.0, 15);
        (net, ch, est)
    }

    fn base() -> ScalingParams<f64> {
        ScalingParams::new(4.0, 0.5, 0.5)
    }

    #[test]
    fn if_equals_mrt_precoder() {
        let (net, _, est) = setup(256, base());
        let a = build_precoder(OperationKind::If, &est, &net).unwrap();
        let b = build_precoder(OperationKind::Mrt, &est, &net).unwrap();
        assert_eq!(a.f, b.f);
    }

    #[test]
    fn single_user_matched_filter() {
        let mut p = ScalingParams::new(4.0, 0.0, 0.0);
        p.upsilon_pa = 0.0;
        p.upsilon_pr = 0.0;
        let net = place_and_associate(&NetworkConfig::new(16, p, 1)).unwrap();
        let ch = draw_channels(&net, 2);
        let est = EstimatedChannels::genie(&net, &ch);
        let pre = build_precoder(OperationKind::Mrt, &est, &net).unwrap();
        let psi = effective_channels(&pre, &ch, &net);
        let g2: f64 = net.beta(0, 0) * norm_sqr(ch.h(0, 0));
        assert!((psi[0][0].re - g2).abs() < 1e-9 * g2);
        assert!(psi[0][0].im.abs() < 1e-9 * g2);
    }

    #[test]
    fn genie_zf_is_identity() {
        let (net, ch, _) = setup(1024, base());
        let est = EstimatedChannels::genie(&net, &ch);
        let pre = build_precoder(OperationKind::Zf, &est, &net).unwrap();
        let psi = effective_channels(&pre, &ch, &net);
        for (k, row) in psi.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((z - C::new(target, 0.0)).norm() < 1e-8, "{k},{j}: {z}");
            }
        }
    }

    #[test]
    fn fast_path_matches_explicit() {
        let (net, ch, est) = setup(512, base().with_association(0.3));
        let ops = OperationKind::ALL;
        let fast = measure_many(&ops, &net, &ch, &est, 2.5).unwrap();
        for (op, m) in ops.iter().zip(&fast) {
            let pre = build_precoder(*op, &est, &net).unwrap();
            let q = allocate_power(&pre, 2.5).unwrap();
            let psi = effective_channels(&pre, &ch, &net);
            let slow = link_metrics(*op, &psi[net.typical_user], q, net.typical_user);
            assert!((m.snr - slow.snr).abs() <= 1e-9 * slow.snr, "{op}");
            assert!((m.sinr - slow.sinr).abs() <= 1e-9 * slow.sinr, "{op}");
            for (a, b) in m.q.iter().zip(&slow.q) {
                assert!((a - b).abs() <= 1e-9 * b);
            }
        }
    }

    #[test]
    fn power_rescales_with_norm() {
        let (net, _, est) = setup(256, base());
        let mut pre = build_precoder(OperationKind::Mrt, &est, &net).unwrap();
        let q1 = allocate_power(&pre, 1.0).unwrap();
        for z in &mut pre.f {
            *z *= 2f64.sqrt();
        }
        let q2 = allocate_power(&pre, 1.0).unwrap();
        for (a, b) in q1.iter().zip(&q2) {
            assert!((a / b - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_unit_norm_power() {
        let pre = Precoder {
            operation: OperationKind::Mrt,
            n: 2,
            k: 2,
            f: vec![C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0)],
        };
        assert_eq!(allocate_power(&pre, 2.0).unwrap(), vec![2.0, 2.0]);
        assert_eq!(allocate_power(&pre, 0.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn zero_norm_rejected() {
        let pre = Precoder {
            operation: OperationKind::Mrt,
            n: 1,
            k: 2,
            f: vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
        };
        assert!(matches!(allocate_power(&pre, 1.0), Err(Error::ZeroNormPrecoder { user: 1 })));
    }

    #[test]
    fn zero_precoder_zero_psi() {
        let (net, ch, _) = setup(64, base());
        let k = net.sizes.k;
        let n = net.sizes.n_realized;
        let pre = Precoder {
            operation: OperationKind::Mrt,
            n,
            k,
            f: vec![C::new(0.0, 0.0); n * k],
        };
        let psi = effective_channels(&pre, &ch, &net);
        assert!(psi.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn metric_identities() {
        let row = [C::new(1.0, 0.0), C::new(0.5, 0.5)];
        let m = link_metrics(OperationKind::Mrt, &row, vec![2.0, 4.0], 0);
        assert_eq!(m.snr, 2.0);
        assert_eq!(m.interference, 2.0);
        assert_eq!(m.sir, 1.0);
        assert!((m.sinr - 2.0f64 / 3.0).abs() < 1e-15);
        let i = link_metrics(OperationKind::If, &row, vec![2.0, 4.0], 0);
        assert_eq!(i.sir, f64::INFINITY);
        assert_eq!(i.sinr, 2.0 / 1.0);
        // snr = sir = 2 gives sinr = 1 when interference is 1
        let h = link_metrics(OperationKind::Mrt, &row, vec![2.0, 2.0], 0);
        assert_eq!((h.snr, h.sir), (2.0, 2.0));
        assert_eq!(h.sinr, 1.0);
    }

    #[test]
    fn zf_rejects_wide_systems() {
        let mut p = ScalingParams::new(4.0, 0.5, 1.0);
        p.upsilon_pr = 0.0;
        let (net, _, est) = setup(64, p);
        // no antennas left, so N = 0 < K
        let mut wide = est.clone();
        wide.m = 0;
        assert!(matches!(
            build_precoder(OperationKind::Zf, &wide, &net),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn single_precision_runs() {
        let net = place_and_associate(&NetworkConfig::new(256, base().cast::<f32>(), 13)).unwrap();
        let ch = draw_channels(&net, 14);
        let est = estimate(&net, &ch, 1.0f32, 15);
        let m = measure_many(&OperationKind::ALL, &net, &ch, &est, 1.0).unwrap();
        assert!(m.iter().all(|x| x.snr > 0.0 && x.sinr.is_finite()));
    }
}
