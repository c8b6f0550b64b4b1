//! Monte Carlo estimators for the free snake under ℙ₀.

use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::state::SnakeState;
use super::SnakeError;
use crate::analytics::GreenTable;
use crate::distributions::JumpDistribution;
use crate::lattice::{Point, SiteSet};
use crate::replicate::Replication;
use crate::rng::stream;
use crate::stats::{bowker, permutation_mean_test, EstimateRecord, TestOutcome};

const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

fn four_pi2_sigma4(theta: &JumpDistribution) -> f64 {
    4.0 * PI2 * theta.sigma2 * theta.sigma2
}

fn second_moment(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)
}

/// (log n / n) R_n with R_n = #{Ŵ₀, …, Ŵ_n}, read off one trajectory per replica at every checkpoint.
pub fn free_range_trace(theta: &JumpDistribution, checkpoints: &[u64], rep: &Replication) -> Vec<EstimateRecord> {
    assert!(checkpoints.windows(2).all(|w| w[0] < w[1]), "checkpoints must increase");
    assert!(checkpoints.first().is_some_and(|&n| n >= 2), "n must be at least 2");
    let nmax = *checkpoints.last().unwrap();
    let runs: Vec<Vec<usize>> = rep.run(|_, rng| {
        let mut s = SnakeState::new(0);
        let mut seen = SiteSet::with_capacity(theta.dim, (nmax / 4) as usize);
        seen.insert(s.head());
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut next = checkpoints.iter().peekable();
        for k in 1..=nmax {
            s.step(theta, rng);
            seen.insert(s.head());
            if next.peek() == Some(&&k) {
                out.push(seen.len());
                next.next();
            }
        }
        out
    });
    checkpoints
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let scale = (n as f64).ln() / n as f64;
            let xs: Vec<f64> = runs.iter().map(|r| r[c] as f64 * scale).collect();
            EstimateRecord::from_samples(&xs, rep.seed, json!({"n": n, "dim": theta.dim}))
                .with_extra("limit", four_pi2_sigma4(theta))
                .with_extra("second_moment", second_moment(&xs))
                .with_extra("variance", variance(&xs))
        })
        .collect()
}

/// (log n / n) R_n for the free snake.
pub fn free_range(theta: &JumpDistribution, n: u64, rep: &Replication) -> EstimateRecord {
    free_range_trace(theta, &[n], rep).remove(0)
}

/// First k ≥ 1 with Ŵ_k = 0, if it happens by step n.
fn first_head_return<R: Rng + ?Sized>(theta: &JumpDistribution, n: u64, rng: &mut R) -> Option<u64> {
    let mut s = SnakeState::new(0);
    (1..=n).find(|_| {
        s.step(theta, rng);
        s.head().is_origin()
    })
}

/// P(Ŵ_k ≠ 0 for all k ∈ ⟦1, n⟧); `extra.scaled` is log n times the estimate.
pub fn estimate_no_return_head(theta: &JumpDistribution, n: u64, rep: &Replication) -> EstimateRecord {
    let xs: Vec<f64> = rep.run(|_, rng| if first_head_return(theta, n, rng).is_none() { 1.0 } else { 0.0 });
    let rec = EstimateRecord::from_samples(&xs, rep.seed, json!({"n": n, "dim": theta.dim}));
    let ln = (n as f64).max(2.0).ln();
    let (scaled, scaled_err) = (rec.value * ln, rec.stderr * ln);
    rec.with_extra("scaled", scaled).with_extra("scaled_stderr", scaled_err).with_extra("limit", four_pi2_sigma4(theta))
}

/// P(Ŵ_k ≠ 0 for all k ∈ ⟦1, τ_p⟧) with τ_p = inf{n ≥ 0 : ζ_n = ζ₀ − p}.
///
/// Replicas still running after `step_cap` steps count as survivors and are reported in
/// `extra.truncated`; `extra.scaled` is log p times the estimate.
pub fn no_return_head_stopped(theta: &JumpDistribution, p: u64, step_cap: u64, rep: &Replication) -> EstimateRecord {
    assert!(p >= 1);
    let runs: Vec<(bool, bool)> = rep.run(|_, rng| {
        let mut s = SnakeState::new(0);
        for _ in 0..step_cap {
            s.step(theta, rng);
            if s.head().is_origin() {
                return (false, false);
            }
            if s.zeta() == -(p as i64) {
                return (true, false);
            }
        }
        (true, true)
    });
    let xs: Vec<f64> = runs.iter().map(|r| if r.0 { 1.0 } else { 0.0 }).collect();
    let truncated = runs.iter().filter(|r| r.1).count();
    let rec = EstimateRecord::from_samples(&xs, rep.seed, json!({"p": p, "dim": theta.dim, "step_cap": step_cap}));
    let lp = (p as f64).max(2.0).ln();
    let (scaled, scaled_err) = (rec.value * lp, rec.stderr * lp);
    rec.with_extra("scaled", scaled)
        .with_extra("scaled_stderr", scaled_err)
        .with_extra("limit", 0.5 * four_pi2_sigma4(theta))
        .with_extra("truncated", truncated as u64)
}

/// Swap test for (W₀, W̃_k) given Ŵ_k = 0.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub k: u64,
    pub reps: u64,
    pub hits: u64,
    /// Bowker test on (−min ζ, ζ_k − min ζ).
    pub depth: TestOutcome,
    /// Bowker test on the first steps (W₀(−1) − W₀(0), W̃_k(−1) − W̃_k(0)).
    pub first_step: TestOutcome,
    /// Permutation test of equal means for the two depth coordinates.
    pub permutation_p: f64,
}

impl SymmetryReport {
    pub fn passes(&self, level: f64) -> bool {
        self.depth.passes(level) && self.first_step.passes(level) && self.permutation_p > level
    }
}

pub fn symmetry_check(theta: &JumpDistribution, k: u64, rep: &Replication) -> Result<SymmetryReport, SnakeError> {
    const NEEDED: u64 = 100;
    let steps: Vec<Point> = theta.support.iter().map(|(x, _)| -*x).collect();
    let runs: Vec<Option<(usize, usize, usize, usize)>> = rep.run(|_, rng| {
        let mut s = SnakeState::new(0);
        for _ in 0..k {
            s.step(theta, rng);
        }
        if !s.head().is_origin() {
            return None;
        }
        let i = (-s.running_min()) as usize;
        let j = (s.zeta() - s.running_min()) as usize;
        let z = s.zeta();
        let a = s.initial_at(-1, theta, rng) - s.initial_at(0, theta, rng);
        let b = s.read(z - 1, theta, rng) - s.read(z, theta, rng);
        let idx = |d: Point| steps.iter().position(|&x| x == d).expect("step in support");
        Some((i, j, idx(a), idx(b)))
    });
    let hits: Vec<_> = runs.into_iter().flatten().collect();
    if (hits.len() as u64) < NEEDED {
        return Err(SnakeError::TooFewHits { hits: hits.len() as u64, needed: NEEDED });
    }
    let kk = k as usize + 1;
    let mut depth = vec![vec![0u64; kk]; kk];
    let mut first = vec![vec![0u64; steps.len()]; steps.len()];
    for &(i, j, a, b) in &hits {
        depth[i][j] += 1;
        first[a][b] += 1;
    }
    let is: Vec<f64> = hits.iter().map(|h| h.0 as f64).collect();
    let js: Vec<f64> = hits.iter().map(|h| h.1 as f64).collect();
    let mut prng = stream(crate::rng::subseed(rep.seed, 0x5e_77), 0);
    Ok(SymmetryReport {
        k,
        reps: rep.reps,
        hits: hits.len() as u64,
        depth: bowker(&depth),
        first_step: bowker(&first),
        permutation_p: permutation_mean_test(&is, &js, 2000, &mut prng),
    })
}

/// Expected head visits to 0 before τ_m against 2 Σ_{j<m} G(−W₀(−j)) for a frozen W₀.
#[derive(Debug, Clone, Serialize)]
pub struct GreenIdentityReport {
    pub mc: EstimateRecord,
    pub rhs: f64,
    pub truncated: u64,
}

impl GreenIdentityReport {
    pub fn z_score(&self) -> f64 {
        (self.mc.value - self.rhs).abs() / self.mc.stderr
    }
}

/// `initial` lists W₀(0), W₀(−1), …, W₀(−(m−1)); the snake starts at lifetime 0 and runs
/// until its lifetime reaches −m or `step_cap` steps have elapsed.
pub fn green_identity_check(
    theta: &JumpDistribution,
    table: &GreenTable,
    initial: &[Point],
    step_cap: u64,
    rep: &Replication,
) -> GreenIdentityReport {
    let m = initial.len() as i64;
    assert!(m >= 1);
    let rhs = 2.0 * initial.iter().map(|w| table.eval(&-*w)).sum::<f64>();
    let runs: Vec<(f64, bool)> = rep.run(|_, rng| {
        let mut s = SnakeState::with_initial(0, initial.to_vec());
        let mut visits = u64::from(s.head().is_origin());
        for _ in 0..step_cap {
            s.step(theta, rng);
            if s.zeta() == -m {
                return (visits as f64, false);
            }
            visits += u64::from(s.head().is_origin());
        }
        (visits as f64, true)
    });
    let xs: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let truncated = runs.iter().filter(|r| r.1).count() as u64;
    let mc = EstimateRecord::from_samples(&xs, rep.seed, json!({"m": m, "dim": theta.dim, "step_cap": step_cap}))
        .with_extra("rhs", rhs);
    GreenIdentityReport { mc, rhs, truncated }
}
