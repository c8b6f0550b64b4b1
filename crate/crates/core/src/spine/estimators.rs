use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::htable::{HTable, GROUPS};
use super::walk::SpineWalk;
use super::SpineError;
use crate::distributions::{JumpDistribution, OffspringDistribution};
use crate::gw_trees::{assign_locations, range_of, sample_gw_conditioned_size, sample_uniform_plane_tree};
use crate::lattice::{Point, SiteSet};
use crate::replicate::Replication;
use crate::stats::{mean_stderr, EstimateRecord};

/// R_k = #{z_{u₀}, …, z_{u_{k−1}}} at the requested k.
#[derive(Debug, Clone, Serialize)]
pub struct RangeTrace {
    pub n: u64,
    pub checkpoints: Vec<u64>,
    pub r_values: Vec<u64>,
}

fn params(mu: &OffspringDistribution, theta: &JumpDistribution, extra: serde_json::Value) -> serde_json::Value {
    let mut p = json!({"mu": mu.name, "dim": theta.dim});
    if let (Some(p), serde_json::Value::Object(e)) = (p.as_object_mut(), extra) {
        p.extend(e);
    }
    p
}

pub fn range_process<R: Rng + ?Sized>(
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    n: u64,
    checkpoints: &[u64],
    rng: &mut R,
) -> RangeTrace {
    assert!(n >= 1);
    let mut cps: Vec<u64> = checkpoints.iter().copied().filter(|&k| (1..=n).contains(&k)).collect();
    cps.push(n);
    cps.sort_unstable();
    cps.dedup();
    let mut seen = SiteSet::with_capacity(theta.dim, (n as usize).min(1 << 26));
    let mut r_values = Vec::with_capacity(cps.len());
    let mut next = 0;
    for (i, (_, z)) in SpineWalk::new(mu, theta, rng).take(n as usize).enumerate() {
        seen.insert(z);
        if i as u64 + 1 == cps[next] {
            r_values.push(seen.len() as u64);
            next += 1;
        }
    }
    RangeTrace { n, checkpoints: cps, r_values }
}

/// R_n / n on the infinite tree.
pub fn infinite_range(mu: &OffspringDistribution, theta: &JumpDistribution, n: u64, rep: &Replication) -> EstimateRecord {
    let t = Instant::now();
    let xs: Vec<f64> = rep.run(|_, rng| range_process(mu, theta, n, &[], rng).r_values[0] as f64 / n as f64);
    let mut rec = EstimateRecord::from_samples(&xs, rep.seed, params(mu, theta, json!({"n": n})));
    rec.elapsed_ms = t.elapsed().as_millis() as u64;
    rec
}

/// 𝐏*(z_{u_j} ≠ 0 for 1 ≤ j ≤ horizon).
pub fn estimate_no_return(mu: &OffspringDistribution, theta: &JumpDistribution, horizon: u64, rep: &Replication) -> EstimateRecord {
    let t = Instant::now();
    let xs: Vec<f64> = rep.run(|_, rng| {
        let hit = SpineWalk::new(mu, theta, rng).skip(1).take(horizon as usize).any(|(_, z)| z.is_origin());
        if hit {
            0.0
        } else {
            1.0
        }
    });
    let mut rec = EstimateRecord::from_samples(&xs, rep.seed, params(mu, theta, json!({"horizon": horizon})));
    rec.elapsed_ms = t.elapsed().as_millis() as u64;
    rec
}

/// Whether a Π*_{μ,θ} tree has a vertex other than the root at `target`; `None` if the
/// exploration reached `cap` vertices first.
fn tree_hits<R: Rng + ?Sized>(
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    target: Point,
    cap: u64,
    rng: &mut R,
) -> Option<bool> {
    let mut stack: Vec<(Point, u32)> = vec![(Point::ORIGIN, mu.sample(rng))];
    let mut size = 1u64;
    while let Some(top) = stack.last_mut() {
        if top.1 == 0 {
            stack.pop();
            continue;
        }
        if size >= cap {
            return None;
        }
        top.1 -= 1;
        let z = top.0 + theta.sample(rng);
        if z == target {
            return Some(true);
        }
        size += 1;
        stack.push((z, mu.sample(rng)));
    }
    Some(false)
}

fn avoidance(
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    target: Point,
    cap: u64,
    rep: &Replication,
    p: serde_json::Value,
) -> EstimateRecord {
    let t = Instant::now();
    let runs: Vec<Option<bool>> = rep.run(|_, rng| tree_hits(mu, theta, target, cap, rng));
    let xs: Vec<f64> = runs.iter().map(|r| if *r == Some(true) { 0.0 } else { 1.0 }).collect();
    let truncated = runs.iter().filter(|r| r.is_none()).count() as u64;
    let mut rec = EstimateRecord::from_samples(&xs, rep.seed, p).with_extra("truncated", truncated);
    rec.elapsed_ms = t.elapsed().as_millis() as u64;
    rec
}

/// a_{μ,θ} = Π*(z_u ≠ 0 for u ≠ ∅). Trees still unexplored at `size_cap` count as avoiding.
pub fn estimate_a(mu: &OffspringDistribution, theta: &JumpDistribution, size_cap: u64, rep: &Replication) -> EstimateRecord {
    avoidance(mu, theta, Point::ORIGIN, size_cap, rep, params(mu, theta, json!({"size_cap": size_cap})))
}

/// h_{μ,θ}(y) = Π*(z_u ≠ −y for all u).
pub fn estimate_h(mu: &OffspringDistribution, theta: &JumpDistribution, y: &Point, size_cap: u64, rep: &Replication) -> EstimateRecord {
    let p = params(mu, theta, json!({"y": y.coords(theta.dim), "size_cap": size_cap}));
    if y.is_origin() {
        return EstimateRecord::exact(0.0, p);
    }
    avoidance(mu, theta, -*y, size_cap, rep, p)
}

/// a_{μ,θ} E[∏_{j=1}^{j_max} Φ(−S_j)] with h read from `table`.
///
/// The reported stderr combines the trajectory sampling error with the jackknife error
/// of the table.
pub fn estimate_c_formula(
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    table: &HTable,
    j_max: u64,
    rep: &Replication,
) -> Result<EstimateRecord, SpineError> {
    let t = Instant::now();
    let steps: Vec<(Point, f64)> = theta.support.clone();
    type Run = ([f64; GROUPS + 1], f64, u64);
    let runs: Vec<Result<Run, SpineError>> = rep.run(|_, rng| {
        let mut s = Point::ORIGIN;
        let mut log_prod = [0.0f64; GROUPS + 1];
        let mut half = 0.0;
        let mut fallbacks = 0u64;
        for j in 1..=j_max {
            s += theta.sample(rng);
            let x = -s;
            let mut inner = [0.0f64; GROUPS + 1];
            for (y, w) in &steps {
                let (h, fb) = table.eval(&(x + *y))?;
                fallbacks += u64::from(fb);
                for g in 0..=GROUPS {
                    inner[g] += w * h[g];
                }
            }
            for g in 0..=GROUPS {
                log_prod[g] += mu.tail_series(inner[g]).ln();
            }
            if j == j_max / 2 {
                half = log_prod[0];
            }
        }
        Ok((log_prod, log_prod[0] - half, fallbacks))
    });
    let runs: Vec<Run> = runs.into_iter().collect::<Result<_, _>>()?;
    let a = table.a();
    let prods: Vec<f64> = runs.iter().map(|r| r.0[0].exp()).collect();
    let (mean, se) = mean_stderr(&prods);
    let full = a[0] * mean;
    let loo: Vec<f64> =
        (1..=GROUPS).map(|g| a[g] * runs.iter().map(|r| r.0[g].exp()).sum::<f64>() / runs.len() as f64).collect();
    let loo_mean = loo.iter().sum::<f64>() / GROUPS as f64;
    let jack_var = (GROUPS as f64 - 1.0) / GROUPS as f64 * loo.iter().map(|c| (c - loo_mean).powi(2)).sum::<f64>();
    let mc_se = a[0] * se;
    let drift: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let fallbacks: u64 = runs.iter().map(|r| r.2).sum();
    let lookups = rep.reps * j_max * steps.len() as u64;
    let mut rec = EstimateRecord::from_samples(&[full], rep.seed, params(mu, theta, json!({"j_max": j_max})));
    rec.reps = rep.reps;
    rec.extra.remove("warning");
    rec.stderr = (mc_se * mc_se + jack_var).sqrt();
    rec.elapsed_ms = t.elapsed().as_millis() as u64;
    Ok(rec
        .with_extra("a", a[0])
        .with_extra("product_mean", mean)
        .with_extra("mc_stderr", mc_se)
        .with_extra("jackknife_stderr", jack_var.sqrt())
        .with_extra("log_product_drift_second_half", mean_stderr(&drift).0)
        .with_extra("fallback_fraction", fallbacks as f64 / lookups.max(1) as f64)
        .with_extra("h_table", table.summary()))
}

/// ℛ(𝒯)/n for spatial trees conditioned on n + 1 vertices.
pub fn conditioned_range(
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    n: u64,
    rep: &Replication,
) -> Result<EstimateRecord, SpineError> {
    assert!(n >= 1, "n must be positive");
    if !mu.size_feasible(n + 1) {
        return Err(crate::gw_trees::GwError::InfeasibleSize { n: n + 1 }.into());
    }
    let t = Instant::now();
    let runs: Vec<Result<f64, SpineError>> = rep.run(|_, rng| {
        let tree = if mu.is_geometric() { sample_uniform_plane_tree(n + 1, rng) } else { sample_gw_conditioned_size(mu, n + 1, rng)? };
        Ok(range_of(&assign_locations(&tree, theta, rng)) as f64 / n as f64)
    });
    let xs: Vec<f64> = runs.into_iter().collect::<Result<_, _>>()?;
    let mut rec = EstimateRecord::from_samples(&xs, rep.seed, params(mu, theta, json!({"n": n})));
    rec.elapsed_ms = t.elapsed().as_millis() as u64;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::GreenTable;
    use crate::distributions::{make_geometric_critical, make_jump_srw};
    use crate::rng::stream;
    use crate::spine::HFallback;

    #[test]
    fn trace_is_monotone_and_bounded() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let mut rng = stream(1, 0);
        let t = range_process(&mu, &theta, 10_000, &[1, 10, 100, 1000], &mut rng);
        assert_eq!(t.checkpoints, vec![1, 10, 100, 1000, 10_000]);
        assert_eq!(t.r_values[0], 1);
        assert!(t.r_values.windows(2).all(|w| w[0] <= w[1]));
        assert!(t.checkpoints.iter().zip(&t.r_values).all(|(n, r)| r <= n));
    }

    #[test]
    fn horizon_one_matches_spine_walk_law() {
        // u₁ hangs on the first spine vertex −k with children: z_{u₁} = −S_k + X, and for
        // geometric μ that k is geometric with P(k) = 2^{−(k+1)} (k ≥ 1) besides k = 0 w.p. 1/2
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let p = crate::analytics::return_probabilities(&theta, 60).unwrap();
        let hit: f64 = (1..60).map(|k| 0.5f64.powi(k as i32 + 1) * p[k + 1]).sum();
        let est = estimate_no_return(&mu, &theta, 1, &Replication::new(40_000, 2));
        assert!((est.value - (1.0 - hit)).abs() < 4.0 * est.stderr, "{} vs {}", est.value, 1.0 - hit);
    }

    #[test]
    fn h_at_origin_is_zero() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        assert_eq!(estimate_h(&mu, &theta, &Point::ORIGIN, 1000, &Replication::new(10, 3)).value, 0.0);
    }

    #[test]
    fn a_exceeds_leaf_mass() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let a = estimate_a(&mu, &theta, 1_000_000, &Replication::new(4000, 4));
        assert!(a.value >= 0.5 - 3.0 * a.stderr);
    }

    #[test]
    fn h_respects_green_bound() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let g = GreenTable::build(&theta, 4).unwrap();
        for y in [Point::unit(0), Point::from_slice(&[1, 1, 0, 0, 0]), Point::from_slice(&[2, 0, 0, 0, 0])] {
            let h = estimate_h(&mu, &theta, &y, 1_000_000, &Replication::new(4000, 5));
            assert!(h.value >= 1.0 - g.eval(&-y) - 3.0 * h.stderr, "{y:?}: {}", h.value);
        }
    }

    #[test]
    fn zero_horizon_formula_is_a() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let table = HTable::build(&mu, &theta, 3, 100_000, HFallback::Strict, &Replication::new(800, 6));
        let c = estimate_c_formula(&mu, &theta, &table, 0, &Replication::new(10, 7)).unwrap();
        assert!((c.value - table.a()[0]).abs() < 1e-12);
    }

    #[test]
    fn strict_table_reports_misses() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let table = HTable::build(&mu, &theta, 1, 10_000, HFallback::Strict, &Replication::new(64, 6));
        let err = estimate_c_formula(&mu, &theta, &table, 1000, &Replication::new(4, 7)).unwrap_err();
        assert!(matches!(err, SpineError::HTableMiss(_)));
    }

    #[test]
    fn conditioned_two_vertices() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let r = conditioned_range(&mu, &theta, 1, &Replication::new(50, 8)).unwrap();
        assert_eq!(r.value, 2.0);
        let binary = crate::distributions::make_offspring(&[(0, 0.5), (2, 0.5)]).unwrap();
        assert!(conditioned_range(&binary, &theta, 3, &Replication::new(5, 8)).is_err());
    }
}
