use serde::Serialize;
use statrs::function::erf::erfc;

use super::measure::PointMeasure;
use super::run::{brw_run_from, BrwRunResult};
use super::BrwError;
use crate::distributions::{JumpDistribution, OffspringDistribution};
use crate::replicate::Replication;
use crate::stats::{interquartile_range, ks_one_sample, median, TestOutcome};

/// P(J ≤ s) for the first hitting time J of level 1 by standard Brownian motion.
pub fn j_cdf(s: f64) -> Result<f64, BrwError> {
    if s.is_nan() || s <= 0.0 {
        return Err(BrwError::DomainError(format!("need s > 0, got {s}")));
    }
    if s.is_infinite() {
        return Ok(1.0);
    }
    // 2(1 − Φ(x)) = erfc(x/√2)
    Ok(erfc((0.5 / s).sqrt()))
}

/// P(N = n) for n = 0..=nmax, N the hitting time of −p by the walk with steps k − 1, k ~ μ.
pub fn progeny_pmf(mu: &OffspringDistribution, p: u64, nmax: usize) -> Vec<f64> {
    // level h ≥ 1 means h particles still to be expanded
    let top = p as usize + nmax * mu.max_value().unwrap_or(nmax as u32).max(1) as usize + 1;
    let top = top.min(p as usize + nmax * nmax + 1);
    let kmax = top;
    let pmf: Vec<f64> = (0..=kmax as u32).map(|k| mu.pmf(k)).collect();
    let mut cur = vec![0.0; top + 1];
    cur[p as usize] = 1.0;
    let mut out = vec![0.0; nmax + 1];
    for slot in out.iter_mut().skip(1) {
        let mut next = vec![0.0; top + 1];
        for (h, &w) in cur.iter().enumerate().skip(1) {
            if w == 0.0 {
                continue;
            }
            for (k, &q) in pmf.iter().enumerate() {
                let to = h - 1 + k;
                if to > top {
                    break;
                }
                next[to] += w * q;
            }
        }
        *slot = next[0];
        next[0] = 0.0;
        cur = next;
    }
    out
}

/// Replica results of the p-particle experiment with their summary statistics.
#[derive(Debug, Clone, Serialize)]
pub struct RatioSummary {
    pub p: u64,
    pub dim: usize,
    pub runs: Vec<BrwRunResult>,
    pub truncated: u64,
    /// Median and interquartile range of R/N over untruncated replicas.
    pub ratio_median: f64,
    pub ratio_iqr: f64,
    /// (log p)·median(R/N), the d = 4 statistic.
    pub log_scaled_ratio: f64,
    /// 8π²σ⁴.
    pub d4_limit: f64,
}

pub fn ratio_experiment(
    p: u64,
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    progeny_cap: u64,
    rep: &Replication,
) -> RatioSummary {
    ratio_experiment_from(&PointMeasure::at_origin(p), mu, theta, progeny_cap, rep)
}

/// As `ratio_experiment`, with every replica started from `initial`.
pub fn ratio_experiment_from(
    initial: &PointMeasure,
    mu: &OffspringDistribution,
    theta: &JumpDistribution,
    progeny_cap: u64,
    rep: &Replication,
) -> RatioSummary {
    let p = initial.total();
    let runs: Vec<BrwRunResult> = rep.run(|_, rng| brw_run_from(initial.clone(), mu, theta, rng, progeny_cap));
    let ratios: Vec<f64> = runs.iter().filter(|r| !r.truncated).map(|r| r.range as f64 / r.progeny as f64).collect();
    let truncated = runs.iter().filter(|r| r.truncated).count() as u64;
    let (med, iqr) = if ratios.is_empty() { (f64::NAN, f64::NAN) } else { (median(&ratios), interquartile_range(&ratios)) };
    let pi2 = std::f64::consts::PI.powi(2);
    RatioSummary {
        p,
        dim: theta.dim,
        runs,
        truncated,
        ratio_median: med,
        ratio_iqr: iqr,
        log_scaled_ratio: (p as f64).ln() * med,
        d4_limit: 8.0 * pi2 * theta.sigma2 * theta.sigma2,
    }
}

/// KS test of N/p² against σ_μ^{−2} J. Truncated replicas are right-censored at cap/p².
pub fn progeny_ks(runs: &[BrwRunResult], p: u64, sigma2_mu: f64, progeny_cap: u64) -> TestOutcome {
    let p2 = (p * p) as f64;
    let xs: Vec<f64> = runs.iter().map(|r| if r.truncated { f64::INFINITY } else { r.progeny as f64 / p2 }).collect();
    let censor = runs.iter().any(|r| r.truncated).then_some(progeny_cap as f64 / p2);
    ks_one_sample(&xs, |s| if s <= 0.0 { 0.0 } else { j_cdf(sigma2_mu * s).unwrap() }, censor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_geometric_critical, make_jump_srw, make_offspring};

    #[test]
    fn j_cdf_values() {
        let v = j_cdf(1.0).unwrap();
        assert!((v - 0.31731050786291415).abs() < 1e-9, "{v:e}");
        let s_med = 1.0 / 0.6744897501960817f64.powi(2);
        assert!((j_cdf(s_med).unwrap() - 0.5).abs() < 1e-9);
        assert!(j_cdf(1e12).unwrap() > 0.999);
        assert!(j_cdf(0.0).is_err());
        assert!(j_cdf(-1.0).is_err());
    }

    #[test]
    fn j_cdf_matches_density_quadrature() {
        let rule = crate::analytics::gauss_legendre(20);
        let dens = |s: f64| (2.0 * std::f64::consts::PI * s.powi(3)).powf(-0.5) * (-0.5 / s).exp();
        let mut acc = 0.0;
        let (a, b, m) = (1e-6, 3.0, 300);
        let h = (b - a) / m as f64;
        for i in 0..m {
            let lo = a + i as f64 * h;
            acc += rule.iter().map(|(x, w)| w * h / 2.0 * dens(lo + (x + 1.0) * h / 2.0)).sum::<f64>();
        }
        assert!((acc - j_cdf(3.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn progeny_pmf_small_cases() {
        let mu = make_geometric_critical();
        let pmf = progeny_pmf(&mu, 1, 4);
        assert_eq!(pmf[1], 0.5);
        assert!((pmf[2] - 0.125).abs() < 1e-15);
        // Catalan(2)/2^5 for three vertices
        assert!((pmf[3] - 2.0 / 32.0).abs() < 1e-15);
        let binary = make_offspring(&[(0, 0.5), (2, 0.5)]).unwrap();
        let pb = progeny_pmf(&binary, 1, 6);
        assert_eq!(pb[2], 0.0);
        assert!((pb[3] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn one_particle_law_matches_dp() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let rep = Replication::new(40_000, 5);
        let s = ratio_experiment(1, &mu, &theta, 1_000_000, &rep);
        let pmf = progeny_pmf(&mu, 1, 9);
        let n = s.runs.len() as f64;
        for (k, &q) in pmf.iter().enumerate().skip(1) {
            let f = s.runs.iter().filter(|r| r.progeny == k as u64).count() as f64 / n;
            assert!((f - q).abs() < 4.0 * (q * (1.0 - q) / n).sqrt() + 1e-12, "N = {k}: {f} vs {q}");
        }
    }
}
