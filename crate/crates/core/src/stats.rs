//! Estimates, reductions and goodness-of-fit tests.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// A Monte Carlo (or exact) estimate with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateRecord {
    pub value: f64,
    /// Sample standard deviation over √reps; zero for exact values and single replicas.
    pub stderr: f64,
    pub reps: u64,
    pub seed: u64,
    pub params: serde_json::Value,
    /// Experiment-specific diagnostics.
    pub extra: serde_json::Map<String, serde_json::Value>,
    pub elapsed_ms: u64,
}

impl EstimateRecord {
    pub fn from_samples(samples: &[f64], seed: u64, params: serde_json::Value) -> Self {
        let (value, stderr) = mean_stderr(samples);
        let mut rec = EstimateRecord { value, stderr, reps: samples.len() as u64, seed, params, extra: Default::default(), elapsed_ms: 0 };
        if samples.len() == 1 {
            rec.extra.insert("warning".into(), "single_replica".into());
        }
        rec
    }

    pub fn exact(value: f64, params: serde_json::Value) -> Self {
        EstimateRecord { value, stderr: 0.0, reps: 1, seed: 0, params, extra: Default::default(), elapsed_ms: 0 }
    }

    pub fn with_extra(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.extra.insert(key.into(), value.into());
        self
    }

    /// Number of combined standard errors separating two estimates.
    pub fn z_distance(&self, other: &EstimateRecord) -> f64 {
        let s = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        if s == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.value - other.value).abs() / s
        }
    }
}

/// Mean and standard error (sample standard deviation with n − 1, over √n).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn interquartile_range(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.75) - quantile(&v, 0.25)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

impl TestOutcome {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value > level
    }
}

/// Pearson chi-square goodness of fit. Cells with expected count below 5 are pooled
/// (in order) with their neighbours; `probs` may sum to less than one, the remainder
/// forming an extra cell whose observed count is inferred from the total.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], total: u64) -> TestOutcome {
    assert_eq!(observed.len(), probs.len());
    let n = total as f64;
    let mut cells: Vec<(f64, f64)> = observed.iter().zip(probs).map(|(&o, &p)| (o as f64, p * n)).collect();
    let rest_o = n - cells.iter().map(|c| c.0).sum::<f64>();
    let rest_e = n - cells.iter().map(|c| c.1).sum::<f64>();
    if rest_e > 1e-9 * n || rest_o > 0.0 {
        cells.push((rest_o, rest_e.max(0.0)));
    }
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for c in cells {
        acc.0 += c.0;
        acc.1 += c.1;
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => pooled.push(acc),
        }
    }
    let stat: f64 = pooled.iter().map(|(o, e)| if *e > 0.0 { (o - e).powi(2) / e } else if *o > 0.0 { f64::INFINITY } else { 0.0 }).sum();
    let df = pooled.len().saturating_sub(1) as f64;
    TestOutcome { statistic: stat, df, p_value: chi2_sf(stat, df) }
}

/// Chi-square test of homogeneity for two count vectors over the same cells.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> TestOutcome {
    assert_eq!(a.len(), b.len());
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    // pool sparse cells into a trailing bucket
    let (mut ra, mut rb) = (0.0, 0.0);
    let add = |x: f64, y: f64, stat: &mut f64, cells: &mut usize| {
        let tot = x + y;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        *stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
        *cells += 1;
    };
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        if x + y >= 10.0 {
            add(x, y, &mut stat, &mut cells);
        } else {
            ra += x;
            rb += y;
        }
    }
    if ra + rb > 0.0 {
        add(ra, rb, &mut stat, &mut cells);
    }
    let df = cells.saturating_sub(1) as f64;
    TestOutcome { statistic: stat, df, p_value: chi2_sf(stat, df) }
}

/// Bowker's test of symmetry of a square contingency table.
pub fn bowker(table: &[Vec<u64>]) -> TestOutcome {
    let k = table.len();
    let mut stat = 0.0;
    let mut df = 0.0;
    for i in 0..k {
        for j in i + 1..k {
            let (a, b) = (table[i][j] as f64, table[j][i] as f64);
            if a + b > 0.0 {
                stat += (a - b).powi(2) / (a + b);
                df += 1.0;
            }
        }
    }
    TestOutcome { statistic: stat, df, p_value: chi2_sf(stat, df) }
}

fn chi2_sf(stat: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    if !stat.is_finite() {
        return 0.0;
    }
    1.0 - ChiSquared::new(df).expect("positive df").cdf(stat)
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let t = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        s += if k % 2 == 1 { t } else { -t };
        if t < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
///
/// Values of `samples` equal to `f64::INFINITY` are right-censored observations known
/// only to exceed `censor_at`; the supremum is then taken over `(−∞, censor_at)`.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64, censor_at: Option<f64>) -> TestOutcome {
    let n = samples.len();
    let mut v: Vec<f64> = samples.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if censor_at.is_some_and(|c| x >= c) {
            break;
        }
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n as f64 - f).max(f - i as f64 / n as f64);
    }
    if let Some(c) = censor_at {
        let below = v.iter().filter(|&&x| x < c).count();
        d = d.max((cdf(c) - below as f64 / n as f64).abs());
    }
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    TestOutcome { statistic: d, df: n as f64, p_value: kolmogorov_sf(lambda) }
}

/// Two-sample Kolmogorov–Smirnov test. Ties are handled by stepping both empirical
/// CDFs past each distinct value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestOutcome {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sn = ne.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    TestOutcome { statistic: d, df: ne, p_value: kolmogorov_sf(lambda) }
}

/// Two-sided permutation test for a difference of means.
pub fn permutation_mean_test<R: rand::Rng>(a: &[f64], b: &[f64], rounds: usize, rng: &mut R) -> f64 {
    use rand::seq::SliceRandom;
    let obs = (a.iter().sum::<f64>() / a.len() as f64 - b.iter().sum::<f64>() / b.len() as f64).abs();
    let mut pool: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut hits = 0;
    for _ in 0..rounds {
        pool.shuffle(rng);
        let (pa, pb) = pool.split_at(a.len());
        let diff = (pa.iter().sum::<f64>() / pa.len() as f64 - pb.iter().sum::<f64>() / pb.len() as f64).abs();
        if diff >= obs - 1e-15 {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (rounds + 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert_abs_diff_eq!(s, (5.0f64 / 3.0 / 4.0).sqrt(), epsilon = 1e-15);
        assert_eq!(mean_stderr(&[3.0]).1, 0.0);
    }

    #[test]
    fn chi_square_known_value() {
        // observed 10, 20, 30 against uniform: stat = (10² + 0 + 10²)/20 = 10, df 2
        let t = chi_square_gof(&[10, 20, 30], &[1.0 / 3.0; 3], 60);
        assert_abs_diff_eq!(t.statistic, 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.p_value, (-5.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn kolmogorov_tail() {
        assert_abs_diff_eq!(kolmogorov_sf(1.36), 0.0494, epsilon = 5e-4);
        assert_abs_diff_eq!(kolmogorov_sf(1.628), 0.0100, epsilon = 3e-4);
    }

    #[test]
    fn bowker_symmetric_table() {
        let t = bowker(&[vec![5, 3], vec![3, 9]]);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.p_value, 1.0);
    }

    #[test]
    fn ks_uniform_grid() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let t = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0), None);
        assert!(t.statistic <= 0.0005 + 1e-12);
        assert!(t.p_value > 0.99);
        let c = ks_two_sample(&xs, &xs);
        assert_eq!(c.statistic, 0.0);
    }

    #[test]
    fn iqr_and_quantiles() {
        let xs: Vec<f64> = (0..=100).map(|i| i as f64).collect();
        assert_eq!(interquartile_range(&xs), 50.0);
        assert_eq!(median(&xs), 50.0);
    }
}
