//! Snake excursions: the lifetime is a uniform Dyck path.

use rand::Rng;

use crate::distributions::JumpDistribution;
use crate::gw_trees::sample_uniform_plane_tree;
use crate::lattice::{Point, SiteSet};
use crate::replicate::Replication;
use crate::stats::EstimateRecord;

/// One excursion of duration 2n: lifetime and head at every step.
#[derive(Debug, Clone)]
pub struct ExcursionSample {
    pub zeta: Vec<u32>,
    pub heads: Vec<Point>,
}

impl ExcursionSample {
    pub fn duration(&self) -> usize {
        self.zeta.len() - 1
    }
}

/// Snake excursion of duration 2n started from the trivial path at the origin.
///
/// The lifetime is the contour of a uniform plane tree with n edges; the head moves by a
/// fresh θ-step on every up-step and returns to the stored value on every down-step.
pub fn sample_excursion<R: Rng + ?Sized>(n: u64, theta: &JumpDistribution, rng: &mut R) -> ExcursionSample {
    let zeta = sample_uniform_plane_tree(n + 1, rng).contour();
    let mut heads = Vec::with_capacity(zeta.len());
    let mut stack = vec![Point::ORIGIN];
    heads.push(Point::ORIGIN);
    for w in zeta.windows(2) {
        if w[1] > w[0] {
            let h = *stack.last().unwrap() + theta.sample(rng);
            stack.push(h);
        } else {
            stack.pop();
        }
        heads.push(*stack.last().unwrap());
    }
    ExcursionSample { zeta, heads }
}

/// R•_n: distinct head positions over one excursion of duration 2n.
pub fn excursion_range<R: Rng + ?Sized>(n: u64, theta: &JumpDistribution, rng: &mut R) -> usize {
    let ex = sample_excursion(n, theta, rng);
    let mut seen = SiteSet::with_capacity(theta.dim, ex.heads.len() / 2);
    for h in &ex.heads {
        seen.insert(*h);
    }
    seen.len()
}

/// (log n / n) R•_n over replicas; `extra.limit` is 8π²σ⁴.
pub fn excursion_range_estimate(theta: &JumpDistribution, n: u64, rep: &Replication) -> EstimateRecord {
    assert!(n >= 2, "n must be at least 2");
    let scale = (n as f64).ln() / n as f64;
    let xs: Vec<f64> = rep.run(|_, rng| excursion_range(n, theta, rng) as f64 * scale);
    let pi2 = std::f64::consts::PI.powi(2);
    EstimateRecord::from_samples(&xs, rep.seed, serde_json::json!({"n": n, "dim": theta.dim}))
        .with_extra("limit", 8.0 * pi2 * theta.sigma2 * theta.sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::make_jump_srw;
    use crate::rng::stream;

    #[test]
    fn excursion_shape() {
        let theta = make_jump_srw(4);
        let mut rng = stream(3, 0);
        for n in [0u64, 1, 2, 10, 1000] {
            let ex = sample_excursion(n, &theta, &mut rng);
            assert_eq!(ex.duration() as u64, 2 * n);
            assert_eq!(ex.zeta[0], 0);
            assert_eq!(*ex.zeta.last().unwrap(), 0);
            assert!(ex.heads.last().unwrap().is_origin());
            for (i, w) in ex.zeta.windows(2).enumerate() {
                assert_eq!((w[1] as i64 - w[0] as i64).abs(), 1);
                if w[1] > w[0] {
                    assert!(theta.prob(&(ex.heads[i + 1] - ex.heads[i])) > 0.0);
                }
            }
        }
    }

    #[test]
    fn range_is_bounded_by_vertices() {
        let theta = make_jump_srw(4);
        let mut rng = stream(4, 0);
        for _ in 0..20 {
            let r = excursion_range(500, &theta, &mut rng);
            assert!((2..=501).contains(&r));
        }
    }
}
