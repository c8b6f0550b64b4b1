use rand::seq::index::sample as sample_indices;
use rand::Rng;

use super::{GwError, PlaneTree};
use crate::distributions::OffspringDistribution;

pub const DEFAULT_SIZE_CAP: u64 = 1_000_000_000;

/// Unconditioned Galton–Watson tree grown along its Łukasiewicz walk.
pub fn sample_gw<R: Rng + ?Sized>(mu: &OffspringDistribution, rng: &mut R, size_cap: u64) -> Result<PlaneTree, GwError> {
    let mut children = Vec::new();
    let mut pending: u64 = 1;
    while pending > 0 {
        if children.len() as u64 >= size_cap {
            return Err(GwError::CapExceeded { cap: size_cap });
        }
        let k = mu.sample(rng);
        children.push(k);
        pending = pending - 1 + k as u64;
    }
    Ok(PlaneTree::from_children_unchecked(children))
}

/// Rotates child counts summing to `len − 1` so that the Łukasiewicz walk first
/// reaches −1 at the last step: the rotation starts right after the first time the
/// walk attains its minimum.
pub fn cycle_rotate(counts: &mut [u32]) {
    let mut x: i64 = 0;
    let mut min = i64::MAX;
    let mut at = 0;
    for (i, &k) in counts.iter().enumerate() {
        x += k as i64 - 1;
        if x < min {
            min = x;
            at = i;
        }
    }
    debug_assert_eq!(x, -1);
    counts.rotate_left((at + 1) % counts.len());
}

/// Exact sample of a Galton–Watson tree conditioned to have `n` vertices.
pub fn sample_gw_conditioned_size<R: Rng + ?Sized>(mu: &OffspringDistribution, n: u64, rng: &mut R) -> Result<PlaneTree, GwError> {
    if !mu.size_feasible(n) {
        return Err(GwError::InfeasibleSize { n });
    }
    if mu.is_geometric() {
        return Ok(sample_uniform_plane_tree(n, rng));
    }
    let n = n as usize;
    let target = (n - 1) as u64;
    let mut counts = vec![0u32; n];
    loop {
        let mut sum = 0u64;
        for c in counts.iter_mut() {
            *c = mu.sample(rng);
            sum += *c as u64;
            if sum > target {
                break;
            }
        }
        if sum == target {
            break;
        }
    }
    cycle_rotate(&mut counts);
    Ok(PlaneTree::from_children_unchecked(counts))
}

/// Uniform plane tree with `vertices` vertices.
///
/// Child counts of a geometric tree given its size are a uniform weak composition of
/// `vertices − 1` into `vertices` parts; it is drawn as a uniform placement of the
/// separators and then rotated by the cycle lemma.
pub fn sample_uniform_plane_tree<R: Rng + ?Sized>(vertices: u64, rng: &mut R) -> PlaneTree {
    assert!(vertices >= 1, "a tree has at least one vertex");
    let n = vertices as usize;
    let slots = 2 * (n - 1);
    let mut is_up = vec![false; slots];
    for i in sample_indices(rng, slots, n - 1) {
        is_up[i] = true;
    }
    let mut counts = Vec::with_capacity(n);
    let mut run = 0u32;
    for up in is_up {
        if up {
            run += 1;
        } else {
            counts.push(run);
            run = 0;
        }
    }
    counts.push(run);
    cycle_rotate(&mut counts);
    PlaneTree::from_children_unchecked(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_geometric_critical, make_offspring};
    use crate::rng::stream;
    use crate::stats::chi_square_gof;
    use std::collections::BTreeMap;

    #[test]
    fn small_size_probabilities() {
        let mu = make_geometric_critical();
        let mut rng = stream(1, 0);
        let n = 200_000;
        let mut one = 0;
        let mut two = 0;
        for _ in 0..n {
            match sample_gw(&mu, &mut rng, 1 << 20) {
                Ok(t) if t.size() == 1 => one += 1,
                Ok(t) if t.size() == 2 => two += 1,
                _ => {}
            }
        }
        let p1 = one as f64 / n as f64;
        let p2 = two as f64 / n as f64;
        assert!((p1 - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
        assert!((p2 - 0.125).abs() < 4.0 * (0.125 * 0.875 / n as f64).sqrt());
    }

    #[test]
    fn cap_is_enforced() {
        let mu = make_geometric_critical();
        let mut rng = stream(2, 0);
        let capped = (0..2000).filter(|_| matches!(sample_gw(&mu, &mut rng, 3), Err(GwError::CapExceeded { cap: 3 }))).count();
        // P(size > 3) = 1 − 1/2 − 1/8 − 1/16 = 5/16
        assert!((capped as f64 / 2000.0 - 5.0 / 16.0).abs() < 0.05);
    }

    #[test]
    fn conditioned_sizes_and_infeasibility() {
        let mu = make_geometric_critical();
        let mut rng = stream(3, 0);
        assert_eq!(sample_gw_conditioned_size(&mu, 1, &mut rng).unwrap(), PlaneTree::root_only());
        for n in [2, 3, 10, 1000] {
            assert_eq!(sample_gw_conditioned_size(&mu, n, &mut rng).unwrap().size() as u64, n);
        }
        let bin = make_offspring(&[(0, 0.5), (2, 0.5)]).unwrap();
        assert_eq!(sample_gw_conditioned_size(&bin, 4, &mut rng), Err(GwError::InfeasibleSize { n: 4 }));
        let t = sample_gw_conditioned_size(&bin, 7, &mut rng).unwrap();
        assert_eq!(t.size(), 7);
        assert!(t.children().iter().all(|&k| k == 0 || k == 2));
    }

    fn shape_counts(trees: impl Iterator<Item = PlaneTree>) -> BTreeMap<Vec<u32>, u64> {
        let mut m = BTreeMap::new();
        for t in trees {
            *m.entry(t.children().to_vec()).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn uniform_over_catalan_shapes() {
        let mut rng = stream(4, 0);
        let reps = 100_000;
        let m3 = shape_counts((0..reps).map(|_| sample_uniform_plane_tree(3, &mut rng)));
        assert_eq!(m3.len(), 2);
        let obs: Vec<u64> = m3.values().copied().collect();
        assert!(chi_square_gof(&obs, &[0.5, 0.5], reps).passes(0.01));
        let m4 = shape_counts((0..reps).map(|_| sample_uniform_plane_tree(4, &mut rng)));
        assert_eq!(m4.len(), 5);
        let obs: Vec<u64> = m4.values().copied().collect();
        assert!(chi_square_gof(&obs, &[0.2; 5], reps).passes(0.01));
    }

    #[test]
    fn rejection_sampler_matches_enumeration() {
        // binary law, 5 vertices: the two shapes (2,2,0,0,0)-type have equal weight
        let bin = make_offspring(&[(0, 0.5), (2, 0.5)]).unwrap();
        let mut rng = stream(5, 0);
        let reps = 50_000;
        let m = shape_counts((0..reps).map(|_| sample_gw_conditioned_size(&bin, 5, &mut rng).unwrap()));
        assert_eq!(m.len(), 2);
        let obs: Vec<u64> = m.values().copied().collect();
        assert!(chi_square_gof(&obs, &[0.5, 0.5], reps).passes(0.01));
    }
}
