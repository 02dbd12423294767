//! Subtractive (mountain-potential) clustering for rule initialization.

use super::{AnfisModel, GaussianMf, Rule};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringConfig {
    /// Neighbourhood radius in the [0,1]-scaled data space.
    pub radius: f64,
    pub squash_factor: f64,
    pub accept_ratio: f64,
    pub reject_ratio: f64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            radius: 0.2,
            squash_factor: 1.25,
            accept_ratio: 0.5,
            reject_ratio: 0.15,
        }
    }
}

impl ClusteringConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius <= 1.0) {
            return Err(Error::config(format!("clustering radius {} not in (0, 1]", self.radius)));
        }
        if !(self.squash_factor > 1.0) {
            return Err(Error::config("squash factor must exceed 1"));
        }
        if !(0.0 < self.reject_ratio
            && self.reject_ratio < self.accept_ratio
            && self.accept_ratio <= 1.0)
        {
            return Err(Error::config("need 0 < reject_ratio < accept_ratio <= 1"));
        }
        Ok(())
    }
}

fn check_rectangular(data: &[Vec<f64>]) -> Result<usize> {
    let dim = data
        .first()
        .ok_or_else(|| Error::Empty("no data to cluster".into()))?
        .len();
    if dim == 0 {
        return Err(Error::Empty("zero-dimensional data".into()));
    }
    if let Some(bad) = data.iter().find(|v| v.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: bad.len(),
        });
    }
    Ok(dim)
}

/// Per-dimension (min, max).
pub(crate) fn bounds(data: &[Vec<f64>], dim: usize) -> Vec<(f64, f64)> {
    (0..dim)
        .map(|d| {
            data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v[d]), hi.max(v[d]))
            })
        })
        .collect()
}

/// Min-max scales every dimension to [0,1]; constant dimensions map to 0.
fn scale(data: &[Vec<f64>], b: &[(f64, f64)]) -> Vec<Vec<f64>> {
    data.iter()
        .map(|v| {
            v.iter()
                .zip(b)
                .map(|(&x, &(lo, hi))| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
                .collect()
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn first_argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Returns the indices of the selected centers, in selection order.
pub(crate) fn cluster_indices(data: &[Vec<f64>], cfg: &ClusteringConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let dim = check_rectangular(data)?;
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::config("clustering data contains non-finite values"));
    }
    let x = scale(data, &bounds(data, dim));
    let alpha = 4.0 / (cfg.radius * cfg.radius);
    let beta = 4.0 / (cfg.squash_factor * cfg.radius).powi(2);

    let mut p: Vec<f64> = x
        .iter()
        .map(|xi| x.iter().map(|xj| (-alpha * sq_dist(xi, xj)).exp()).sum())
        .collect();
    let first = first_argmax(&p);
    let p_first = p[first];
    let mut centers = vec![first];
    let mut last = first;
    let mut p_last = p_first;

    loop {
        for (pi, xi) in p.iter_mut().zip(&x) {
            *pi -= p_last * (-beta * sq_dist(xi, &x[last])).exp();
        }
        // Accepted points must never be chosen again, whatever the rounding.
        for &c in &centers {
            p[c] = 0.0;
        }
        loop {
            let cand = first_argmax(&p);
            let pc = p[cand];
            if !(pc > 0.0) || pc < cfg.reject_ratio * p_first {
                return Ok(centers);
            }
            let accept = pc > cfg.accept_ratio * p_first || {
                let d_min = centers
                    .iter()
                    .map(|&c| sq_dist(&x[cand], &x[c]))
                    .fold(f64::INFINITY, f64::min)
                    .sqrt();
                d_min / cfg.radius + pc / p_first >= 1.0
            };
            if accept {
                centers.push(cand);
                last = cand;
                p_last = pc;
                break;
            }
            p[cand] = 0.0;
        }
    }
}

/// Cluster centers in original coordinates (each is one of the data points).
pub fn subtractive_clustering(data: &[Vec<f64>], cfg: &ClusteringConfig) -> Result<Vec<Vec<f64>>> {
    Ok(cluster_indices(data, cfg)?
        .into_iter()
        .map(|i| data[i].clone())
        .collect())
}

/// Widths follow the clustering radius: `sigma_d = radius * range_d / sqrt(8)`,
/// with `range_d` taken as 1 for constant dimensions. Consequents start at 0.
pub fn init_from_centers(centers: &[Vec<f64>], data: &[Vec<f64>], radius: f64) -> Result<AnfisModel> {
    if centers.is_empty() {
        return Err(Error::Empty("no cluster centers".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::config("radius must be positive"));
    }
    let dim = check_rectangular(data)?;
    let sigmas: Vec<f64> = bounds(data, dim)
        .into_iter()
        .map(|(lo, hi)| {
            let range = if hi > lo { hi - lo } else { 1.0 };
            radius * range / 8f64.sqrt()
        })
        .collect();
    let rules = centers
        .iter()
        .map(|c| {
            if c.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: c.len(),
                });
            }
            Ok(Rule {
                antecedents: c
                    .iter()
                    .zip(&sigmas)
                    .map(|(&center, &sigma)| GaussianMf { center, sigma })
                    .collect(),
                coefficients: vec![0.0; dim],
                bias: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AnfisModel::new(rules)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Straight re-implementation: every iteration recomputes all potentials
    /// from scratch as the initial density minus the contributions of every
    /// center chosen so far.
    pub fn oracle_centers(data: &[Vec<f64>], cfg: &ClusteringConfig) -> Vec<usize> {
        let n = data.len();
        let dim = data[0].len();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for v in data {
            for d in 0..dim {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let x: Vec<Vec<f64>> = data
            .iter()
            .map(|v| (0..dim).map(|d| if hi[d] > lo[d] { (v[d] - lo[d]) / (hi[d] - lo[d]) } else { 0.0 }).collect())
            .collect();
        let dist2 = |i: usize, j: usize| -> f64 { (0..dim).map(|d| (x[i][d] - x[j][d]).powi(2)).sum() };
        let ra = cfg.radius;
        let rb = cfg.squash_factor * ra;
        let p0: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| (-4.0 * dist2(i, j) / (ra * ra)).exp()).sum())
            .collect();
        let mut chosen: Vec<(usize, f64)> = Vec::new();
        let mut rejected: Vec<usize> = Vec::new();
        loop {
            let pot: Vec<f64> = (0..n)
                .map(|i| {
                    if chosen.iter().any(|&(c, _)| c == i) || rejected.contains(&i) {
                        return 0.0;
                    }
                    let mut p = p0[i];
                    for &(c, pc) in &chosen {
                        p -= pc * (-4.0 * dist2(i, c) / (rb * rb)).exp();
                    }
                    p
                })
                .collect();
            let mut best = 0;
            for i in 1..n {
                if pot[i] > pot[best] {
                    best = i;
                }
            }
            let pb = pot[best];
            if chosen.is_empty() {
                chosen.push((best, pb));
                continue;
            }
            let p1 = chosen[0].1;
            if pb <= 0.0 || pb < cfg.reject_ratio * p1 {
                return chosen.into_iter().map(|(c, _)| c).collect();
            }
            let dmin = chosen.iter().map(|&(c, _)| dist2(best, c).sqrt()).fold(f64::INFINITY, f64::min);
            if pb > cfg.accept_ratio * p1 || dmin / ra + pb / p1 >= 1.0 {
                chosen.push((best, pb));
            } else {
                rejected.push(best);
            }
        }
    }

    pub fn two_blobs(seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        for centre in [[0.0, 0.0, 0.0], [10.0, 10.0, 10.0]] {
            for _ in 0..20 {
                data.push(centre.iter().map(|c| c + rng.random_range(-0.3..0.3)).collect());
            }
        }
        data
    }

    #[test]
    fn single_point_is_its_own_center() {
        let data = vec![vec![1.5, -2.0, 3.0]];
        let c = subtractive_clustering(&data, &ClusteringConfig::default()).unwrap();
        assert_eq!(c, data);
    }

    #[test]
    fn two_blobs_give_two_centers() {
        for seed in 0..10 {
            let data = two_blobs(seed);
            let cfg = ClusteringConfig::default();
            let idx = cluster_indices(&data, &cfg).unwrap();
            assert_eq!(idx.len(), 2, "seed {seed}");
            assert!(idx.iter().any(|&i| i < 20) && idx.iter().any(|&i| i >= 20));
            assert_eq!(idx, oracle_centers(&data, &cfg));
        }
    }

    #[test]
    fn matches_oracle_on_spread_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.random_range(5..60);
            let data: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..4).map(|_| rng.random_range(-5.0..5.0)).collect())
                .collect();
            let cfg = ClusteringConfig::default();
            assert_eq!(cluster_indices(&data, &cfg).unwrap(), oracle_centers(&data, &cfg));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = ClusteringConfig::default();
        assert!(matches!(subtractive_clustering(&[], &cfg), Err(Error::Empty(_))));
        assert!(subtractive_clustering(&[vec![0.0, 1.0], vec![0.0]], &cfg).is_err());
        let bad = ClusteringConfig { reject_ratio: 0.6, ..cfg };
        assert!(subtractive_clustering(&[vec![0.0]], &bad).is_err());
    }

    #[test]
    fn init_widths_follow_radius() {
        let data = vec![vec![0.0, 5.0], vec![2.0, 5.0], vec![1.0, 5.0]];
        let m = init_from_centers(&[vec![1.0, 5.0]], &data, 0.2).unwrap();
        let r = &m.rules()[0];
        assert!((r.antecedents[0].sigma - 0.2 * 2.0 / 8f64.sqrt()).abs() < 1e-15);
        assert!((r.antecedents[0].sigma - 0.1414).abs() < 1e-4);
        assert!((r.antecedents[1].sigma - 0.2 / 8f64.sqrt()).abs() < 1e-15);
        let out = m.forward(&[1.0, 5.0]).unwrap();
        assert_eq!(out.output, 0.0);
        assert!(r.antecedents.iter().zip([1.0, 5.0]).all(|(mf, x)| mf.membership(x) == 1.0));
        assert_eq!(m.forward(&[7.0, -3.0]).unwrap().output, 0.0);
    }

    proptest! {
        #[test]
        fn permutation_stable(seed in any::<u64>(), n in 2usize..30, shift in 1usize..29) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.random_range(0.0..1.0)).collect())
                .collect();
            let cfg = ClusteringConfig::default();
            // The property only covers distinct potentials.
            let alpha = 4.0 / (cfg.radius * cfg.radius);
            let x = scale(&data, &bounds(&data, 3));
            let mut p: Vec<f64> = x.iter().map(|a| x.iter().map(|b| (-alpha * sq_dist(a, b)).exp()).sum()).collect();
            p.sort_by(f64::total_cmp);
            prop_assume!(p.windows(2).all(|w| w[1] - w[0] > 1e-9 * w[1]));
            let mut perm = data.clone();
            perm.rotate_left(shift % n);
            perm.reverse();
            let mut a = subtractive_clustering(&data, &cfg).unwrap();
            let mut b = subtractive_clustering(&perm, &cfg).unwrap();
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            b.sort_by(|x, y| x.partial_cmp(y).unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
