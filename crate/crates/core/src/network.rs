//! Finite network realizations on a fixed disk.
//!
//! Densification comes from growing node counts, never from growing area: BSs
//! and users are dropped uniformly on a disk of fixed radius, each user is
//! associated with its `n_pa` nearest BSs, and pilots are drawn from a pool of
//! `t` orthogonal sequences.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exponent::ScalingParams;
use crate::real::Real;
use crate::rng::{purpose, stream, StreamRng};

/// How the measured user is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserSelection {
    /// User nearest the disk center.
    #[default]
    Centroid,
    /// Uniformly random user.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig<T> {
    pub n_target: usize,
    pub params: ScalingParams<T>,
    pub region_radius: T,
    pub seed: u64,
    #[serde(default)]
    pub user_selection: UserSelection,
}

impl<T: Real> NetworkConfig<T> {
    pub fn new(n_target: usize, params: ScalingParams<T>, seed: u64) -> Self {
        Self {
            n_target,
            params,
            region_radius: T::one(),
            seed,
            user_selection: UserSelection::Centroid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_target < 4 {
            return Err(invalid("n_target", format!("must be at least 4, got {}", self.n_target)));
        }
        if !(self.region_radius > T::zero()) || !self.region_radius.is_finite() {
            return Err(invalid("region_radius", "must be positive and finite"));
        }
        self.params.validate()
    }
}

/// Node and resource counts realized at one target size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedSizes {
    /// BSs.
    pub l: usize,
    /// Antennas per BS.
    pub m: usize,
    /// Users.
    pub k: usize,
    /// Orthogonal pilots.
    pub t: usize,
    /// BSs associated with each user.
    pub n_pa: usize,
    /// `l * m`, the size every downstream exponent refers to.
    pub n_realized: usize,
}

fn round_pow(base: f64, exponent: f64) -> usize {
    base.powf(exponent).round() as usize
}

/// Rounds every count to an integer. `K`, `T` and `n_pa` are computed from the
/// realized `N = L * M`, not from the target. Full association and one pilot
/// per user are kept exact: `L` comes from the target, so rounding
/// `N^upsilon_pa` could otherwise drop a BS.
pub fn realize_sizes<T: Real>(n_target: usize, p: &ScalingParams<T>) -> RealizedSizes {
    let n = n_target as f64;
    let l = round_pow(n, p.eta_bs.as_f64()).max(1);
    let m = round_pow(n, p.eta_ant.as_f64()).max(1);
    let n_realized = l * m;
    let nr = n_realized as f64;
    let k = round_pow(nr, p.eta_user.as_f64()).max(1);
    let t = if p.pilot_reuse() {
        round_pow(nr, p.upsilon_pr.as_f64()).min(k).max(1)
    } else {
        k
    };
    let n_pa = if p.partial_association() {
        round_pow(nr, p.upsilon_pa.as_f64()).min(l).max(1)
    } else {
        l
    };
    RealizedSizes {
        l,
        m,
        k,
        t,
        n_pa,
        n_realized,
    }
}

/// One realized network.
///
/// Pairwise arrays are user-major: entry `(l, k)` lives at `k * l_count + l`.
/// Pilot indices are zero-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkInstance<T> {
    pub sizes: RealizedSizes,
    pub alpha: T,
    pub bs_positions: Vec<[T; 2]>,
    pub user_positions: Vec<[T; 2]>,
    pub beta: Vec<T>,
    /// Associated BSs per user, nearest first.
    pub assoc: Vec<Vec<usize>>,
    pub pilot_of: Vec<usize>,
    pub typical_user: usize,
}

impl<T: Real> NetworkInstance<T> {
    #[inline]
    pub fn beta(&self, l: usize, k: usize) -> T {
        self.beta[k * self.sizes.l + l]
    }

    pub fn distance(&self, l: usize, k: usize) -> T {
        dist(self.bs_positions[l], self.user_positions[k])
    }

    /// Dense association mask in the pairwise layout.
    pub fn association_mask(&self) -> Vec<bool> {
        let l = self.sizes.l;
        let mut mask = vec![false; l * self.sizes.k];
        for (k, set) in self.assoc.iter().enumerate() {
            for &b in set {
                mask[k * l + b] = true;
            }
        }
        mask
    }

    /// Users sharing user `k`'s pilot, `k` included.
    pub fn copilot_users(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        let pilot = self.pilot_of[k];
        self.pilot_of
            .iter()
            .enumerate()
            .filter(move |(_, &p)| p == pilot)
            .map(|(j, _)| j)
    }

    pub fn to_snapshot(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).expect("network snapshot serializes")
    }

    pub fn from_snapshot(text: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        serde_json::from_str(text).map_err(|e| invalid("snapshot", e.to_string()))
    }
}

#[inline]
fn dist<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn uniform_disk<T: Real>(rng: &mut StreamRng, count: usize, radius: T) -> Vec<[T; 2]> {
    (0..count)
        .map(|_| {
            let r = radius * T::sample_unit(rng).sqrt();
            let theta = T::TAU() * T::sample_unit(rng);
            [r * theta.cos(), r * theta.sin()]
        })
        .collect()
}

fn has_coincident<T: Real>(bs: &[[T; 2]], users: &[[T; 2]]) -> bool {
    let all: Vec<[T; 2]> = bs.iter().chain(users).copied().collect();
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            if all[i] == all[j] {
                return true;
            }
        }
    }
    false
}

/// Drops nodes, computes pathloss, associates users and assigns pilots.
pub fn place_and_associate<T: Real>(cfg: &NetworkConfig<T>) -> Result<NetworkInstance<T>> {
    cfg.validate()?;
    let sizes = realize_sizes(cfg.n_target, &cfg.params);
    let mut rng = stream(cfg.seed, &[purpose::NETWORK]);
    let mut bs = uniform_disk(&mut rng, sizes.l, cfg.region_radius);
    let mut users = uniform_disk(&mut rng, sizes.k, cfg.region_radius);
    if has_coincident(&bs, &users) {
        rng = stream(cfg.seed, &[purpose::NETWORK_REDRAW]);
        bs = uniform_disk(&mut rng, sizes.l, cfg.region_radius);
        users = uniform_disk(&mut rng, sizes.k, cfg.region_radius);
        if has_coincident(&bs, &users) {
            return Err(Error::DegenerateGeometry);
        }
    }

    let alpha = cfg.params.alpha;
    let mut beta = Vec::with_capacity(sizes.l * sizes.k);
    let mut assoc = Vec::with_capacity(sizes.k);
    for u in &users {
        let d: Vec<T> = bs.iter().map(|b| dist(*b, *u)).collect();
        beta.extend(d.iter().map(|&x| x.powf(-alpha)));
        let mut order: Vec<usize> = (0..sizes.l).collect();
        order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap().then(a.cmp(&b)));
        order.truncate(sizes.n_pa);
        assoc.push(order);
    }

    let typical_user = match cfg.user_selection {
        UserSelection::Centroid => nearest_to_origin(&users),
        UserSelection::Random => rand::Rng::random_range(&mut rng, 0..sizes.k),
    };
    let pilot_of = assign_pilots(&mut rng, sizes.k, sizes.t);

    Ok(NetworkInstance {
        sizes,
        alpha,
        bs_positions: bs,
        user_positions: users,
        beta,
        assoc,
        pilot_of,
        typical_user,
    })
}

fn nearest_to_origin<T: Real>(points: &[[T; 2]]) -> usize {
    let origin = [T::zero(), T::zero()];
    points
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| dist(**a, origin).partial_cmp(&dist(**b, origin)).unwrap())
        .map(|(i, _)| i)
        .expect("at least one user")
}

/// Distinct pilots when the pool is large enough, otherwise i.i.d. uniform.
fn assign_pilots(rng: &mut StreamRng, k: usize, t: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::Rng;
    if t >= k {
        let mut pool: Vec<usize> = (0..t).collect();
        pool.shuffle(rng);
        pool.truncate(k);
        pool
    } else {
        (0..k).map(|_| rng.random_range(0..t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ScalingParams<f64> {
        ScalingParams::new(4.0, 0.5, 0.5)
    }

    #[test]
    fn sizes_exact_square() {
        let s = realize_sizes(1024, &params());
        assert_eq!((s.l, s.m, s.n_realized, s.k, s.t, s.n_pa), (32, 32, 1024, 32, 32, 32));
    }

    #[test]
    fn sizes_round_from_realized() {
        let s = realize_sizes(1000, &params());
        assert_eq!((s.l, s.m, s.n_realized), (32, 32, 1024));
        assert_eq!(s.k, 32);
    }

    #[test]
    fn sizes_single_user() {
        let mut p = params();
        p.eta_user = 0.0;
        p.upsilon_pr = 0.0;
        let s = realize_sizes(4096, &p);
        assert_eq!((s.k, s.t), (1, 1));
    }

    #[test]
    fn full_association_reaches_every_bs() {
        // L = round(100^0.6) = 16, M = 6, but round(96^0.6) = 15
        let p = ScalingParams::new(4.0, 0.6, 0.5);
        let s = realize_sizes(100, &p);
        assert_eq!((s.l, s.n_realized, s.n_pa), (16, 96, 16));
        assert_eq!(s.t, s.k);
    }

    #[test]
    fn sizes_limits_clamped() {
        let p = params().with_association(0.2).with_pilots(0.2);
        let s = realize_sizes(8192, &p);
        assert_eq!((s.l, s.m, s.n_realized), (91, 91, 8281));
        assert_eq!(s.t, (8281f64).powf(0.2).round() as usize);
        assert!(s.n_pa <= s.l && s.t <= s.k);
    }

    #[test]
    fn singleton_network() {
        let mut p = ScalingParams::new(4.0, 0.0, 0.0);
        p.upsilon_pa = 0.0;
        let cfg = NetworkConfig::new(16, p, 3);
        let net = place_and_associate(&cfg).unwrap();
        assert_eq!(net.sizes.l, 1);
        assert_eq!(net.sizes.k, 1);
        assert_eq!(net.assoc, vec![vec![0]]);
        assert_eq!(net.typical_user, 0);
    }

    #[test]
    fn distinct_pilots_without_reuse() {
        let net = place_and_associate(&NetworkConfig::new(1024, params(), 11)).unwrap();
        let mut pilots = net.pilot_of.clone();
        pilots.sort_unstable();
        pilots.dedup();
        assert_eq!(pilots.len(), net.sizes.k);
    }

    #[test]
    fn reuse_stays_in_pool() {
        let p = params().with_pilots(0.2);
        let net = place_and_associate(&NetworkConfig::new(1024, p, 5)).unwrap();
        assert!(net.pilot_of.iter().all(|&x| x < net.sizes.t));
        assert!(net.sizes.t < net.sizes.k);
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = NetworkConfig::new(512, params().with_association(0.3), 99);
        assert_eq!(place_and_associate(&cfg).unwrap(), place_and_associate(&cfg).unwrap());
        let other = NetworkConfig { seed: 100, ..cfg.clone() };
        assert_ne!(place_and_associate(&cfg).unwrap(), place_and_associate(&other).unwrap());
    }

    #[test]
    fn association_sorted_and_sized() {
        let p = params().with_association(0.3);
        let net = place_and_associate(&NetworkConfig::new(2048, p, 1)).unwrap();
        for (k, set) in net.assoc.iter().enumerate() {
            assert_eq!(set.len(), net.sizes.n_pa);
            for w in set.windows(2) {
                assert!(net.distance(w[0], k) <= net.distance(w[1], k));
            }
            // nothing outside the set is closer than the farthest member
            let far = net.distance(*set.last().unwrap(), k);
            for b in 0..net.sizes.l {
                if !set.contains(&b) {
                    assert!(net.distance(b, k) >= far);
                }
            }
        }
    }

    #[test]
    fn pathloss_matches_positions() {
        let net = place_and_associate(&NetworkConfig::new(256, params(), 2)).unwrap();
        for k in 0..net.sizes.k {
            for l in 0..net.sizes.l {
                let expected = net.distance(l, k).powf(-4.0);
                assert!((net.beta(l, k) - expected).abs() <= 1e-12 * expected);
            }
        }
    }

    #[test]
    fn typical_user_is_central() {
        let net = place_and_associate(&NetworkConfig::new(1024, params(), 8)).unwrap();
        let r = |u: [f64; 2]| u[0].hypot(u[1]);
        let best = r(net.user_positions[net.typical_user]);
        assert!(net.user_positions.iter().all(|&u| r(u) >= best));
    }

    #[test]
    fn snapshot_round_trip() {
        let net = place_and_associate(&NetworkConfig::new(64, params().with_pilots(0.25), 4)).unwrap();
        let text = net.to_snapshot();
        assert!(text.contains("\"pilot_of\""));
        assert_eq!(NetworkInstance::<f64>::from_snapshot(&text).unwrap(), net);
    }

    #[test]
    fn rejects_small_networks() {
        assert!(place_and_associate(&NetworkConfig::new(3, params(), 0)).is_err());
        let mut cfg = NetworkConfig::new(64, params(), 0);
        cfg.region_radius = 0.0;
        assert!(place_and_associate(&cfg).is_err());
    }
}
