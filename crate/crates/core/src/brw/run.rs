use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use serde::Serialize;

use super::PointMeasure;
use crate::distributions::{JumpDistribution, OffspringDistribution};
use crate::lattice::{Point, SiteSet};

pub const DEFAULT_PROGENY_CAP: u64 = 100_000_000;

/// Below this many particles per site, particles are moved one by one.
const AGGREGATE_FROM: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BrwRunResult {
    /// Sites ever occupied.
    pub range: u64,
    /// Total number of particles over all generations.
    pub progeny: u64,
    pub generations: u64,
    pub truncated: bool,
}

/// Total offspring of `c` particles.
fn offspring_total<R: Rng + ?Sized>(mu: &OffspringDistribution, c: u64, rng: &mut R) -> u64 {
    if c < AGGREGATE_FROM || !mu.is_geometric() {
        return (0..c).map(|_| mu.sample(rng) as u64).sum();
    }
    // negative binomial(c, 1/2) as a Gamma–Poisson mixture
    let lambda = Gamma::new(c as f64, 1.0).expect("positive shape").sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as u64
}

/// Conditional weights for sequential binomial splitting over θ's support.
fn split_weights(theta: &JumpDistribution) -> Vec<f64> {
    let mut left = 1.0;
    theta
        .support
        .iter()
        .map(|(_, p)| {
            let q = if left > 0.0 { (p / left).clamp(0.0, 1.0) } else { 0.0 };
            left -= p;
            q
        })
        .collect()
}

fn step_with<R: Rng + ?Sized>(
    state: &PointMeasure,
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    weights: &[f64],
    rng: &mut R,
) -> PointMeasure {
    let mut next = PointMeasure::new();
    for (&x, &c) in state.iter() {
        let k = offspring_total(mu, c, rng);
        if k < AGGREGATE_FROM {
            for _ in 0..k {
                next.add(x + theta.sample(rng), 1);
            }
            continue;
        }
        let mut rest = k;
        let last = theta.support.len() - 1;
        for (i, ((y, _), &q)) in theta.support.iter().zip(weights).enumerate() {
            if rest == 0 {
                break;
            }
            let m = if i == last { rest } else { Binomial::new(rest, q).expect("valid binomial").sample(rng) };
            next.add(x + *y, m);
            rest -= m;
        }
    }
    next
}

/// One generation: every particle reproduces according to μ and each child moves by θ.
pub fn brw_step<R: Rng + ?Sized>(
    state: &PointMeasure,
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    rng: &mut R,
) -> PointMeasure {
    step_with(state, mu, theta, &split_weights(theta), rng)
}

/// Runs from `initial` until extinction or until the progeny exceeds `progeny_cap`.
///
/// Generations are kept as flat particle lists; sites are merged only in the visited set.
pub fn brw_run_from<R: Rng + ?Sized>(
    initial: PointMeasure,
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    rng: &mut R,
    progeny_cap: u64,
) -> BrwRunResult {
    let mut seen = SiteSet::new(theta.dim);
    let mut cur: Vec<Point> = Vec::with_capacity(initial.total() as usize);
    for (&x, &c) in initial.iter() {
        cur.extend(std::iter::repeat_n(x, c as usize));
    }
    let mut next: Vec<Point> = Vec::with_capacity(cur.len());
    let mut progeny = 0u64;
    let mut generations = 0u64;
    while !cur.is_empty() {
        progeny += cur.len() as u64;
        for &x in &cur {
            seen.insert(x);
        }
        if progeny > progeny_cap {
            return BrwRunResult { range: seen.len() as u64, progeny, generations, truncated: true };
        }
        next.clear();
        for &x in &cur {
            for _ in 0..mu.sample(rng) {
                next.push(x + theta.sample(rng));
            }
        }
        std::mem::swap(&mut cur, &mut next);
        generations += 1;
    }
    BrwRunResult { range: seen.len() as u64, progeny, generations, truncated: false }
}

/// p particles at the origin.
pub fn brw_run<R: Rng + ?Sized>(
    p: u64,
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    rng: &mut R,
    progeny_cap: u64,
) -> BrwRunResult {
    assert!(p >= 1, "need at least one particle");
    brw_run_from(PointMeasure::at_origin(p), mu, theta, rng, progeny_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_geometric_critical, make_jump_srw, make_offspring};
    use crate::rng::stream;

    #[test]
    fn empty_stays_empty() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(3);
        let mut rng = stream(0, 0);
        assert!(brw_step(&PointMeasure::new(), &mu, &theta, &mut rng).is_empty());
    }

    #[test]
    fn forced_binary_step() {
        // one step of the binary law conditioned on branching, with θ = δ_{e1}
        let mu = make_offspring(&[(0, 0.5), (2, 0.5)]).unwrap();
        let theta = JumpDistribution::unchecked_adaptedness(3, vec![(Point::unit(0), 1.0)]).unwrap();
        let mut rng = stream(1, 0);
        let next = (0..100)
            .map(|_| brw_step(&PointMeasure::at_origin(1), &mu, &theta, &mut rng))
            .find(|m| !m.is_empty())
            .unwrap();
        assert_eq!(next.total(), 2);
        assert_eq!(next.get(&Point::unit(0)), 2);
    }

    #[test]
    fn aggregated_step_keeps_the_mean() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let mut rng = stream(2, 0);
        let start = PointMeasure::at_origin(1000);
        let n = 2000;
        let totals: Vec<f64> = (0..n).map(|_| brw_step(&start, &mu, &theta, &mut rng).total() as f64).collect();
        let (m, s) = crate::stats::mean_stderr(&totals);
        assert!((m - 1000.0).abs() < 4.0 * s, "{m} ± {s}");
        // variance of a sum of 1000 geometric(1/2) counts is 2000
        let var = s * s * n as f64;
        assert!((var / 2000.0 - 1.0).abs() < 0.15, "{var}");
        let one = brw_step(&start, &mu, &theta, &mut rng);
        assert!(one.iter().all(|(x, _)| x.norm_l1() == 1));
    }

    #[test]
    fn range_below_progeny() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(4);
        let mut rng = stream(3, 0);
        for _ in 0..200 {
            let r = brw_run(5, &mu, &theta, &mut rng, 1_000_000);
            assert!(r.range <= r.progeny);
            assert!(r.progeny >= 5);
        }
    }

    #[test]
    fn cap_truncates() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(4);
        let mut rng = stream(4, 0);
        let hits = (0..200).map(|_| brw_run(50, &mu, &theta, &mut rng, 60)).filter(|r| r.truncated).count();
        assert!(hits > 0);
    }
}
