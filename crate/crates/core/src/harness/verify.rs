//! Named exact and statistical checks with a machine-readable report.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;

use super::config::VerifyLevel;
use super::output::ResultRow;
use crate::analytics::{green, kemperman_grid, step_pmf_power, GreenTable, DEFAULT_BOX_BUDGET};
use crate::distributions::{make_geometric_critical, make_jump_srw};
use crate::gw_trees::{lukasiewicz, sample_gw, tree_from_lukasiewicz, PlaneTree};
use crate::lattice::{Point, SiteSet};
use crate::replicate::Replication;
use crate::rng::stream;
use crate::snake::{head_return_exact_rational, head_return_table, pitman_pmf};
use crate::spine::{shift_invariance, SpinePrefix};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub pass: bool,
    pub dim: usize,
    /// The measured quantity (an error, a p-value, a count of mismatches, ...).
    pub value: f64,
    pub tolerance: f64,
    pub detail: serde_json::Value,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: VerifyLevel,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.id).collect()
    }

    pub fn rows(&self) -> Vec<ResultRow> {
        let level = serde_json::to_value(self.level).unwrap_or_default();
        self.checks
            .iter()
            .map(|c| {
                let mut extra = serde_json::Map::new();
                extra.insert("check".into(), c.id.into());
                extra.insert("pass".into(), c.pass.into());
                extra.insert("tolerance".into(), c.tolerance.into());
                extra.insert("level".into(), level.clone());
                extra.insert("detail".into(), c.detail.clone());
                ResultRow {
                    experiment: "verify".into(),
                    dim: c.dim,
                    n: None,
                    p: None,
                    reps: 1,
                    seed: 0,
                    value: c.value,
                    stderr: 0.0,
                    extra,
                    elapsed_ms: c.elapsed_ms,
                }
            })
            .collect()
    }
}

struct Runner {
    checks: Vec<CheckResult>,
}

impl Runner {
    fn check(&mut self, id: &'static str, dim: usize, f: impl FnOnce() -> (f64, f64, bool, serde_json::Value)) {
        let t = Instant::now();
        let (value, tolerance, pass, detail) = f();
        self.checks.push(CheckResult { id, pass, dim, value, tolerance, detail, elapsed_ms: t.elapsed().as_millis() as u64 });
    }
}

/// Law of ζ_k − 2 min_{j ≤ k} ζ_j by enumerating all 2^k paths.
pub fn pitman_by_enumeration(k: u32) -> Vec<u64> {
    let mut counts = vec![0u64; k as usize + 1];
    for bits in 0u64..(1 << k) {
        let (mut z, mut lo) = (0i64, 0i64);
        for i in 0..k {
            z += if bits >> i & 1 == 1 { 1 } else { -1 };
            lo = lo.min(z);
        }
        counts[(z - 2 * lo) as usize] += 1;
    }
    counts
}

fn pitman_mismatches(kmax: u32) -> usize {
    let mut bad = 0;
    for k in 0..=kmax {
        let counts = pitman_by_enumeration(k);
        for (m, &c) in counts.iter().enumerate() {
            let expected = if (k as usize + m) % 2 == 0 { pitman_pmf(k as u64, m as u64).unwrap() } else { BigRational::zero() };
            if BigRational::new(BigInt::from(c), BigInt::one() << k) != expected {
                bad += 1;
            }
        }
    }
    bad
}

fn pitman_normalization_failures(kmax: u64) -> usize {
    (0..=kmax)
        .filter(|&k| {
            let s: BigRational = (k % 2..=k).step_by(2).map(|m| pitman_pmf(k, m).unwrap()).sum();
            !s.is_one()
        })
        .count()
}

/// Harmonicity defect of the SRW Green table, max over |x|_∞ ≤ 4.
const HARMONIC_TOL: f64 = 1e-6;

fn harmonic_check(table: &GreenTable, theta: &crate::distributions::JumpDistribution) -> (f64, f64, bool, serde_json::Value) {
    let d = table.harmonic_defect(theta, 4);
    (d, HARMONIC_TOL, d <= HARMONIC_TOL, json!({"radius": table.radius, "box": 4}))
}

fn roundtrip_failures(count: u64, seed: u64) -> usize {
    let mu = make_geometric_critical();
    (0..count)
        .filter(|&i| {
            let mut rng = stream(seed, i);
            let Ok(t) = sample_gw(&mu, &mut rng, 10_000) else { return false };
            let back = tree_from_lukasiewicz(&lukasiewicz(&t));
            let text = PlaneTree::from_text(&t.to_text());
            back.as_ref() != Ok(&t) || text.as_ref() != Ok(&t)
        })
        .count()
}

fn subadditivity_failures(count: u64, seed: u64) -> usize {
    let mu = make_geometric_critical();
    let theta = make_jump_srw(3);
    let range = |pts: &[Point]| {
        let mut s = SiteSet::new(3);
        pts.iter().for_each(|&z| {
            s.insert(z);
        });
        s.len()
    };
    (0..count)
        .filter(|&i| {
            let mut rng = stream(seed, i);
            let (n, m) = (1 + i as usize % 29, 1 + i as usize % 31);
            let mut p = SpinePrefix::sample(4, &mu, &theta, &mut rng);
            let full = p.enumerate(n + m, &mu, &theta, &mut rng);
            let mut q = p.clone();
            for _ in 0..n {
                q = loop {
                    match q.shift_tau(&mu, &theta, &mut rng) {
                        Ok(next) => break next,
                        Err(_) => q.extend(4, &theta, &mu, &mut rng),
                    }
                };
            }
            let tail = q.enumerate(m, &mu, &theta, &mut rng);
            let continues = tail.iter().zip(&full[n..]).all(|(a, b)| *a == *b - full[n]);
            !continues || range(&full) > range(&full[..n]) + range(&tail)
        })
        .count()
}

/// Runs the checks for `level`. With `corrupt_green` one Green table entry is damaged
/// before the harmonicity check, which must then fail.
pub fn verify(level: VerifyLevel, corrupt_green: bool, seed: u64, workers: usize) -> VerifyReport {
    let full = level == VerifyLevel::Full;
    let mut r = Runner { checks: Vec::new() };
    let srw4 = make_jump_srw(4);

    let (mmax, kmax) = if full { (20, 201) } else { (10, 51) };
    r.check("kemperman", 1, || {
        let (n, bad) = kemperman_grid(mmax, kmax);
        let failures = if bad.is_some() { 1.0 } else { 0.0 };
        (failures, 0.0, bad.is_none(), json!({"m_max": mmax, "k_max": kmax, "pairs": n, "first_mismatch": bad}))
    });

    let kenum = if full { 20 } else { 14 };
    r.check("pitman_enumeration", 1, || {
        let bad = pitman_mismatches(kenum) as f64;
        (bad, 0.0, bad == 0.0, json!({"k_max": kenum}))
    });
    r.check("pitman_normalization", 1, || {
        let bad = pitman_normalization_failures(200) as f64;
        (bad, 0.0, bad == 0.0, json!({"k_max": 200}))
    });

    r.check("head_return_2", 4, || {
        let v = head_return_exact_rational(&srw4, 2).unwrap();
        let target = BigRational::new(11.into(), 32.into());
        let diff = (v.clone() - target).abs();
        let diff_f = num_traits::ToPrimitive::to_f64(&diff).unwrap_or(f64::NAN);
        (diff_f, 0.0, diff.is_zero(), json!({"value": v.to_string()}))
    });

    let mass_k = if full { 1000 } else { 300 };
    r.check("convolution_mass", 2, || {
        let f = step_pmf_power(&make_jump_srw(2), mass_k, DEFAULT_BOX_BUDGET).unwrap();
        let g = step_pmf_power(&srw4, 30, DEFAULT_BOX_BUDGET).unwrap();
        let drift = (f.mass() - 1.0).abs().max((g.mass() - 1.0).abs());
        (drift, 1e-12, drift <= 1e-12, json!({"k_dim2": mass_k, "k_dim4": 30}))
    });

    let mut table = GreenTable::build(&srw4, 8).expect("SRW Green table");
    let mut damaged = table.clone();
    damaged.corrupt(&Point::unit(0), 1.01);
    if corrupt_green {
        table = damaged.clone();
    }
    r.check("green_harmonic", 4, || harmonic_check(&table, &srw4));
    r.check("negative_control", 4, || {
        let (d, tol, ok, _) = harmonic_check(&damaged, &srw4);
        (d, tol, !ok, json!({"corrupted": [1, 0, 0, 0], "factor": 1.01}))
    });

    let ks: Vec<u64> = if full { vec![100, 1000, 10_000] } else { vec![100, 1000] };
    let probs = head_return_table(&srw4, &ks).unwrap();
    let limit = 4.0 / std::f64::consts::PI.powi(2);
    let errs: Vec<f64> = ks.iter().zip(&probs).map(|(&k, p)| (k as f64 * p / limit - 1.0).abs()).collect();
    let errs_period: Vec<f64> = ks.iter().zip(&probs).map(|(&k, p)| (k as f64 * p / 2.0 / limit - 1.0).abs()).collect();
    let decreasing = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    if full {
        let (e, ep) = (errs.clone(), errs_period.clone());
        r.check("visitzero", 4, || {
            let last = *e.last().unwrap();
            (last, 0.05, last <= 0.05 && decreasing(&e), json!({"ks": ks, "k_times_p": k_times(&ks, &probs), "relative_errors": e}))
        });
        r.check("visitzero_period_normalized", 4, || {
            let last = *ep.last().unwrap();
            (last, 0.05, last <= 0.05 && decreasing(&ep), json!({"ks": ks, "relative_errors": ep, "period": 2}))
        });
    } else {
        let ep = errs_period.clone();
        r.check("visitzero_trend", 4, || {
            let last = *ep.last().unwrap();
            (last, 0.2, last <= 0.2 && decreasing(&ep), json!({"ks": ks, "relative_errors": ep, "period": 2}))
        });
    }

    if full {
        r.check("green_asymptotics", 4, || {
            let x = Point::from_slice(&[40, 0, 0, 0]);
            let g = green(&srw4, &x, 1e-9).unwrap();
            let target = 2.0 / std::f64::consts::PI.powi(2);
            let rel = (1600.0 * g.value / target - 1.0).abs();
            (rel, 0.1, rel <= 0.1, json!({"x": [40, 0, 0, 0], "g": g.value, "scaled": 1600.0 * g.value}))
        });
    }

    let fixtures = 1000;
    r.check("lukasiewicz_roundtrip", 0, || {
        let bad = roundtrip_failures(fixtures, seed) as f64;
        (bad, 0.0, bad == 0.0, json!({"fixtures": fixtures}))
    });
    r.check("subadditivity", 3, || {
        let bad = subadditivity_failures(fixtures, seed) as f64;
        (bad, 0.0, bad == 0.0, json!({"fixtures": fixtures}))
    });

    let samples = if full { 100_000 } else { 20_000 };
    r.check("shift_invariance", 3, || {
        let rep = Replication::new(samples, seed).with_workers(workers);
        let reports = shift_invariance(&make_geometric_critical(), &make_jump_srw(3), &[1, 3], &rep);
        let min_p = reports
            .iter()
            .flat_map(|x| [x.joint_gof.p_value, x.homogeneity.p_value, x.step_gof.p_value, x.u1_homogeneity.p_value])
            .fold(1.0, f64::min);
        // four tests per shift count, Bonferroni at 0.01
        let level = 0.01 / (4 * reports.len()) as f64;
        (min_p, level, min_p > level, serde_json::to_value(&reports).unwrap_or_default())
    });

    VerifyReport { level, checks: r.checks }
}

fn k_times(ks: &[u64], probs: &[f64]) -> Vec<f64> {
    ks.iter().zip(probs).map(|(&k, p)| k as f64 * p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_counts_all_paths() {
        for k in 0..10 {
            assert_eq!(pitman_by_enumeration(k).iter().sum::<u64>(), 1 << k);
        }
        // X_1 = 1 always: up gives 1, down gives −1 − 2(−1) = 1
        assert_eq!(pitman_by_enumeration(1), vec![0, 2]);
    }
}
