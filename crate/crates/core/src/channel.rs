//! Short-term fading and MMSE channel estimation with pilot contamination.
//!
//! Channel vectors are stored user-major: the `M` entries of `h_lk` start at
//! `(k * L + l) * M`. A user's full column `[h_1k; ...; h_Lk]` is therefore one
//! contiguous slice of length `N = L * M`, which is also the layout of the
//! precoder columns.

use num_complex::Complex;

use crate::network::NetworkInstance;
use crate::real::Real;
use crate::rng::{purpose, stream, StreamRng};

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cn01<T: Real>(rng: &mut StreamRng) -> C<T> {
    let s = T::FRAC_1_SQRT_2();
    C::new(T::sample_normal(rng) * s, T::sample_normal(rng) * s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    pub l: usize,
    pub m: usize,
    pub k: usize,
    pub h: Vec<C<T>>,
}

impl<T: Real> ChannelRealization<T> {
    #[inline]
    pub fn h(&self, l: usize, k: usize) -> &[C<T>] {
        let start = (k * self.l + l) * self.m;
        &self.h[start..start + self.m]
    }

    /// `h_k` stacked over all BSs, length `N`.
    #[inline]
    pub fn column(&self, k: usize) -> &[C<T>] {
        let n = self.l * self.m;
        &self.h[k * n..(k + 1) * n]
    }
}

/// Draws i.i.d. CN(0, 1) short-term channels for every (BS, user) pair.
pub fn draw_channels<T: Real>(net: &NetworkInstance<T>, seed: u64) -> ChannelRealization<T> {
    let s = net.sizes;
    let mut rng = stream(seed, &[purpose::CHANNEL]);
    let h = (0..s.k * s.l * s.m).map(|_| cn01(&mut rng)).collect();
    ChannelRealization {
        l: s.l,
        m: s.m,
        k: s.k,
        h,
    }
}

/// MMSE estimates for associated pairs. Entries for non-associated pairs are
/// zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedChannels<T> {
    pub l: usize,
    pub m: usize,
    pub k: usize,
    pub h_hat: Vec<C<T>>,
    /// `φ_lkk` for every pair, user-major. Defined for non-associated pairs
    /// too even though their estimate is zero.
    pub phi: Vec<T>,
    pub p_ul: T,
    /// `D` per (BS, pilot), pilot-major: index `pilot * L + l`.
    pub denom: Vec<T>,
    pub genie: bool,
}

impl<T: Real> EstimatedChannels<T> {
    #[inline]
    pub fn h_hat(&self, l: usize, k: usize) -> &[C<T>] {
        let start = (k * self.l + l) * self.m;
        &self.h_hat[start..start + self.m]
    }

    #[inline]
    pub fn phi(&self, l: usize, k: usize) -> T {
        self.phi[k * self.l + l]
    }

    /// `φ_ljk`, the weight of `h_lj` inside `ĥ_lk`. Zero unless `j` and `k`
    /// share a pilot.
    pub fn cross_coefficient(&self, net: &NetworkInstance<T>, l: usize, j: usize, k: usize) -> T {
        if self.genie {
            return if j == k { T::one() } else { T::zero() };
        }
        if net.pilot_of[j] != net.pilot_of[k] {
            return T::zero();
        }
        let d = self.denom[net.pilot_of[k] * self.l + l];
        (self.p_ul * self.p_ul * net.beta(l, j) * net.beta(l, k)).sqrt() / d
    }

    /// Perfect CSI: `ĥ = h` on associated pairs.
    pub fn genie(net: &NetworkInstance<T>, ch: &ChannelRealization<T>) -> Self {
        let s = net.sizes;
        let mut h_hat = vec![C::new(T::zero(), T::zero()); ch.h.len()];
        for (k, set) in net.assoc.iter().enumerate() {
            for &l in set {
                let start = (k * s.l + l) * s.m;
                h_hat[start..start + s.m].copy_from_slice(ch.h(l, k));
            }
        }
        Self {
            l: s.l,
            m: s.m,
            k: s.k,
            h_hat,
            phi: vec![T::one(); s.l * s.k],
            p_ul: T::infinity(),
            denom: Vec::new(),
            genie: true,
        }
    }
}

/// MMSE estimation from the received pilot signal, built directly from its
/// decomposition into co-pilot channels plus one noise vector per
/// (BS, pilot). Co-pilot users at a BS see the same noise vector.
pub fn estimate<T: Real>(
    net: &NetworkInstance<T>,
    ch: &ChannelRealization<T>,
    p_ul: T,
    noise_seed: u64,
) -> EstimatedChannels<T> {
    let s = net.sizes;
    let (l_count, m) = (s.l, s.m);
    let zero = C::new(T::zero(), T::zero());

    let mut users_of_pilot = vec![Vec::new(); s.t];
    for (k, &p) in net.pilot_of.iter().enumerate() {
        users_of_pilot[p].push(k);
    }

    let mut denom = vec![T::one(); s.t * l_count];
    for (p, users) in users_of_pilot.iter().enumerate() {
        for l in 0..l_count {
            let acc = users
                .iter()
                .fold(T::zero(), |acc, &i| acc + p_ul * net.beta(l, i));
            denom[p * l_count + l] = denom[p * l_count + l] + acc;
        }
    }

    let mut phi = vec![T::zero(); l_count * s.k];
    for k in 0..s.k {
        for l in 0..l_count {
            phi[k * l_count + l] = p_ul * net.beta(l, k) / denom[net.pilot_of[k] * l_count + l];
        }
    }

    // y_{l,p} is only needed where some user on pilot p is associated with l.
    let mut needed = vec![false; s.t * l_count];
    for (k, set) in net.assoc.iter().enumerate() {
        for &l in set {
            needed[net.pilot_of[k] * l_count + l] = true;
        }
    }

    let mut rng = stream(noise_seed, &[purpose::NOISE]);
    let mut y = vec![zero; s.t * l_count * m];
    for p in 0..s.t {
        for l in 0..l_count {
            let idx = p * l_count + l;
            let out = &mut y[idx * m..(idx + 1) * m];
            // Noise is drawn for every slot so the stream does not depend on
            // the association pattern.
            for v in out.iter_mut() {
                *v = cn01(&mut rng);
            }
            if !needed[idx] {
                continue;
            }
            for &i in &users_of_pilot[p] {
                let a = (p_ul * net.beta(l, i)).sqrt();
                for (o, hv) in out.iter_mut().zip(ch.h(l, i)) {
                    *o = *o + hv * a;
                }
            }
        }
    }

    let mut h_hat = vec![zero; ch.h.len()];
    for (k, set) in net.assoc.iter().enumerate() {
        let p = net.pilot_of[k];
        for &l in set {
            let idx = p * l_count + l;
            let w = (p_ul * net.beta(l, k)).sqrt() / denom[idx];
            let start = (k * l_count + l) * m;
            for (o, yv) in h_hat[start..start + m].iter_mut().zip(&y[idx * m..(idx + 1) * m]) {
                *o = yv * w;
            }
        }
    }

    EstimatedChannels {
        l: l_count,
        m,
        k: s.k,
        h_hat,
        phi,
        p_ul,
        denom,
        genie: false,
    }
}
