use rand::Rng;
use rustc_hash::FxHashMap;
use serde_json::json;

use super::SpineError;
use crate::analytics::{GreenTable, Symmetry};
use crate::distributions::{orbit_size, JumpDistribution, OffspringDistribution};
use crate::lattice::{Point, SiteSet};
use crate::replicate::Replication;

/// Jackknife groups used for the table's sampling error.
pub const GROUPS: usize = 8;
/// Estimates h from the full sample and from each leave-one-group-out sample.
pub type HValues = [f64; GROUPS + 1];

const KEY_BITS: u32 = 7;

/// What to return outside the box.
#[derive(Debug, Clone)]
pub enum HFallback {
    /// h(x) ≈ max(0, 1 − G(−x)).
    Green(GreenTable),
    /// Fail with `HTableMiss`.
    Strict,
}

/// Monte Carlo table of h_{μ,θ}(y) = Π*(z_u ≠ −y for all u) on {|y|_∞ ≤ radius},
/// together with a_{μ,θ} from the same trees.
#[derive(Debug, Clone)]
pub struct HTable {
    pub dim: usize,
    pub radius: i32,
    pub symmetry: Symmetry,
    /// Trees per jackknife group.
    pub group_trees: [u64; GROUPS],
    /// Trees that reached the size cap (their visited sets are partial).
    pub truncated: u64,
    /// Trees returning to 0 below the root, per group.
    returns: [u64; GROUPS],
    /// Orbit-averaged visit counts of −y, per group.
    hits: FxHashMap<u64, [f64; GROUPS]>,
    fallback: HFallback,
}

fn orbit(sym: Symmetry, key: &Point, dim: usize) -> f64 {
    match sym {
        Symmetry::Hyperoctahedral => orbit_size(key, dim) as f64,
        Symmetry::SignFlips => (1u64 << key.0[..dim].iter().filter(|&&v| v != 0).count()) as f64,
        Symmetry::None => 1.0,
    }
}

fn pack(key: &Point, dim: usize, radius: i32) -> u64 {
    key.0[..dim].iter().fold(0u64, |acc, &v| (acc << KEY_BITS) | (v + radius) as u64)
}

struct TreeSummary {
    returned: bool,
    truncated: bool,
    visited: Vec<Point>,
}

/// Distinct locations of one Π*_{μ,θ} tree inside the box, explored up to `cap` vertices.
fn explore<R: Rng + ?Sized>(mu: &OffspringDistribution, theta: &JumpDistribution, radius: i32, cap: u64, rng: &mut R) -> TreeSummary {
    let mut seen = SiteSet::new(theta.dim);
    seen.insert(Point::ORIGIN);
    let mut returned = false;
    let mut stack: Vec<(Point, u32)> = vec![(Point::ORIGIN, mu.sample(rng))];
    let mut size = 1u64;
    while let Some(top) = stack.last_mut() {
        if top.1 == 0 {
            stack.pop();
            continue;
        }
        if size >= cap {
            return TreeSummary { returned, truncated: true, visited: seen.points() };
        }
        top.1 -= 1;
        let z = top.0 + theta.sample(rng);
        size += 1;
        returned |= z.is_origin();
        if z.norm_inf() <= radius {
            seen.insert(z);
        }
        stack.push((z, mu.sample(rng)));
    }
    TreeSummary { returned, truncated: false, visited: seen.points() }
}

impl HTable {
    /// Grows `rep.reps` trees (capped at `size_cap` vertices) split into jackknife groups.
    pub fn build(
        mu: &OffspringDistribution,
        theta: &JumpDistribution,
        radius: i32,
        size_cap: u64,
        fallback: HFallback,
        rep: &Replication,
    ) -> HTable {
        assert!((0..1 << (KEY_BITS - 1)).contains(&radius), "radius must be below {}", 1 << (KEY_BITS - 1));
        let dim = theta.dim;
        let symmetry = Symmetry::of(theta);
        let per = rep.reps.div_ceil(GROUPS as u64);
        let block = 64u64;
        let blocks = rep.reps.div_ceil(block);
        let mut table = HTable {
            dim,
            radius,
            symmetry,
            group_trees: [0; GROUPS],
            truncated: 0,
            returns: [0; GROUPS],
            hits: FxHashMap::default(),
            fallback,
        };
        // merge in waves to bound memory
        let wave = 32u64;
        for w0 in (0..blocks).step_by(wave as usize) {
            let parts = rep.run_range(w0..(w0 + wave).min(blocks), |b, rng| {
                let lo = b * block;
                let hi = (lo + block).min(rep.reps);
                let mut map: FxHashMap<u64, f64> = FxHashMap::default();
                let (mut returns, mut truncated) = (0, 0);
                for _ in lo..hi {
                    let t = explore(mu, theta, radius, size_cap, rng);
                    returns += u64::from(t.returned);
                    truncated += u64::from(t.truncated);
                    for z in t.visited {
                        // −y = z
                        let key = symmetry.key(&-z, dim);
                        *map.entry(pack(&key, dim, radius)).or_insert(0.0) += 1.0 / orbit(symmetry, &key, dim);
                    }
                }
                ((lo / per) as usize, hi - lo, returns, truncated, map)
            });
            for (g, n, ret, trunc, map) in parts {
                table.group_trees[g] += n;
                table.returns[g] += ret;
                table.truncated += trunc;
                for (k, v) in map {
                    table.hits.entry(k).or_insert([0.0; GROUPS])[g] += v;
                }
            }
        }
        table
    }

    pub fn trees(&self) -> u64 {
        self.group_trees.iter().sum()
    }

    fn loo(&self, per_group: &[f64; GROUPS]) -> HValues {
        let total: f64 = per_group.iter().sum();
        let n = self.trees() as f64;
        let mut out = [0.0; GROUPS + 1];
        out[0] = total / n;
        for g in 0..GROUPS {
            let ng = n - self.group_trees[g] as f64;
            out[g + 1] = if ng > 0.0 { (total - per_group[g]) / ng } else { out[0] };
        }
        out
    }

    /// a_{μ,θ}: fraction of trees with no non-root vertex at 0.
    pub fn a(&self) -> HValues {
        self.loo(&self.returns.map(|r| r as f64)).map(|r| 1.0 - r)
    }

    /// h(y) for |y|_∞ ≤ radius, `None` outside.
    pub fn lookup(&self, y: &Point) -> Option<HValues> {
        if y.norm_inf() > self.radius {
            return None;
        }
        let key = self.symmetry.key(y, self.dim);
        Some(match self.hits.get(&pack(&key, self.dim, self.radius)) {
            Some(h) => self.loo(h).map(|p| (1.0 - p).max(0.0)),
            None => [1.0; GROUPS + 1],
        })
    }

    /// h(y) with the fallback outside the box; the flag is true when the fallback was used.
    pub fn eval(&self, y: &Point) -> Result<(HValues, bool), SpineError> {
        if let Some(h) = self.lookup(y) {
            return Ok((h, false));
        }
        match &self.fallback {
            HFallback::Green(g) => Ok(([(1.0 - g.eval(&-*y)).max(0.0); GROUPS + 1], true)),
            HFallback::Strict => Err(SpineError::HTableMiss(*y)),
        }
    }

    pub fn summary(&self) -> serde_json::Value {
        json!({
            "radius": self.radius,
            "trees": self.trees(),
            "truncated": self.truncated,
            "classes": self.hits.len(),
            "a": self.a()[0],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_geometric_critical, make_jump_srw};

    #[test]
    fn origin_is_always_hit() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let t = HTable::build(&mu, &theta, 4, 100_000, HFallback::Strict, &Replication::new(2000, 1));
        assert_eq!(t.trees(), 2000);
        assert!(t.lookup(&Point::ORIGIN).unwrap().iter().all(|&h| h.abs() < 1e-6));
        let h1 = t.lookup(&Point::unit(2)).unwrap()[0];
        assert!(h1 > 0.5 && h1 < 1.0);
        assert!(t.a()[0] >= 0.5 - 3.0 * (0.25f64 / 2000.0).sqrt());
        assert_eq!(t.eval(&Point::from_slice(&[5, 0, 0, 0, 0])), Err(SpineError::HTableMiss(Point::from_slice(&[5, 0, 0, 0, 0]))));
    }

    #[test]
    fn symmetric_points_share_values() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let t = HTable::build(&mu, &theta, 3, 100_000, HFallback::Strict, &Replication::new(500, 2));
        let a = Point::from_slice(&[1, -2, 0, 0, 0]);
        let b = Point::from_slice(&[0, 0, 2, 0, 1]);
        assert_eq!(t.lookup(&a), t.lookup(&b));
    }
}
