use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use serde::Serialize;

use super::DistError;

const NORM_TOL: f64 = 1e-12;
const MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OffspringKind {
    /// pmf(k) = 2^{-(k+1)}.
    Geometric,
    /// Finite table; `pmf[k]` is the mass at k.
    Table { pmf: Vec<f64> },
}

/// A critical offspring law μ on ℤ₊.
#[derive(Debug, Clone)]
pub struct OffspringDistribution {
    pub name: String,
    pub kind: OffspringKind,
    pub variance: f64,
    // alias tables for μ and for the tail law k ↦ μ([k+1, ∞)); unused for the geometric law
    pmf_alias: Option<WeightedAliasIndex<f64>>,
    tail_alias: Option<WeightedAliasIndex<f64>>,
}

/// The geometric law with parameter 1/2.
pub fn make_geometric_critical() -> OffspringDistribution {
    OffspringDistribution {
        name: "geometric".into(),
        kind: OffspringKind::Geometric,
        variance: 2.0,
        pmf_alias: None,
        tail_alias: None,
    }
}

/// Validates a finite table of `(k, p)` entries.
pub fn make_offspring(entries: &[(u32, f64)]) -> Result<OffspringDistribution, DistError> {
    OffspringDistribution::from_entries("table", entries)
}

impl OffspringDistribution {
    pub fn from_entries(name: &str, entries: &[(u32, f64)]) -> Result<Self, DistError> {
        let kmax = entries.iter().map(|e| e.0).max().ok_or_else(|| DistError::InvalidEntry("empty pmf".into()))?;
        let mut pmf = vec![0.0; kmax as usize + 1];
        let mut seen = vec![false; kmax as usize + 1];
        for &(k, p) in entries {
            if !(p.is_finite() && p >= 0.0) {
                return Err(DistError::InvalidEntry(format!("mass {p} at {k}")));
            }
            if std::mem::replace(&mut seen[k as usize], true) {
                return Err(DistError::InvalidEntry(format!("repeated value {k}")));
            }
            pmf[k as usize] = p;
        }
        Self::from_pmf(name, pmf)
    }

    /// Truncated law: `entries` below `cap`, with the remaining mass placed at `cap`.
    pub fn truncated(name: &str, entries: &[(u32, f64)], cap: u32) -> Result<Self, DistError> {
        if let Some(&(k, _)) = entries.iter().find(|e| e.0 >= cap) {
            return Err(DistError::InvalidEntry(format!("value {k} not below cap {cap}")));
        }
        let rest = 1.0 - entries.iter().map(|e| e.1).sum::<f64>();
        if rest < -NORM_TOL {
            return Err(DistError::NotNormalized { sum: 1.0 - rest });
        }
        let mut all = entries.to_vec();
        all.push((cap, rest.max(0.0)));
        Self::from_entries(name, &all)
    }

    /// Power-law tail μ(k) ∝ k^{-1-α} on 2..=cap, with μ(1) = 0 and μ(0) fixing the mean at 1.
    pub fn power_law(alpha: f64, cap: u32) -> Result<Self, DistError> {
        if !(alpha > 1.0 && alpha < 2.0) || cap < 2 {
            return Err(DistError::DomainError(format!("power law needs 1 < alpha < 2 and cap >= 2, got {alpha}, {cap}")));
        }
        let norm: f64 = (2..=cap).map(|k| (k as f64).powf(-alpha)).sum();
        let mut pmf: Vec<f64> = (0..=cap).map(|k| if k >= 2 { (k as f64).powf(-1.0 - alpha) / norm } else { 0.0 }).collect();
        pmf[0] = 1.0 - pmf.iter().sum::<f64>();
        Self::from_pmf(&format!("power-law-{alpha}"), pmf)
    }

    fn from_pmf(name: &str, mut pmf: Vec<f64>) -> Result<Self, DistError> {
        while pmf.len() > 1 && *pmf.last().unwrap() == 0.0 {
            pmf.pop();
        }
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(DistError::NotNormalized { sum });
        }
        if pmf.get(1).copied() == Some(1.0) {
            return Err(DistError::Degenerate);
        }
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        if (mean - 1.0).abs() > MEAN_TOL {
            return Err(DistError::NotCritical { mean });
        }
        let second: f64 = pmf.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
        let tails: Vec<f64> = (0..pmf.len() - 1).map(|k| pmf[k + 1..].iter().sum()).collect();
        let pmf_alias = WeightedAliasIndex::new(pmf.clone()).map_err(|e| DistError::InvalidEntry(e.to_string()))?;
        let tail_alias = WeightedAliasIndex::new(tails).map_err(|e| DistError::InvalidEntry(e.to_string()))?;
        Ok(OffspringDistribution {
            name: name.into(),
            kind: OffspringKind::Table { pmf },
            variance: second - 1.0,
            pmf_alias: Some(pmf_alias),
            tail_alias: Some(tail_alias),
        })
    }

    pub fn is_geometric(&self) -> bool {
        matches!(self.kind, OffspringKind::Geometric)
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    /// Largest value with positive mass, `None` for unbounded support.
    pub fn max_value(&self) -> Option<u32> {
        match &self.kind {
            OffspringKind::Geometric => None,
            OffspringKind::Table { pmf } => Some(pmf.len() as u32 - 1),
        }
    }

    pub fn pmf(&self, k: u32) -> f64 {
        match &self.kind {
            OffspringKind::Geometric => 0.5f64.powi(k as i32 + 1),
            OffspringKind::Table { pmf } => pmf.get(k as usize).copied().unwrap_or(0.0),
        }
    }

    /// μ([k+1, ∞)).
    pub fn tail(&self, k: u32) -> f64 {
        match &self.kind {
            OffspringKind::Geometric => 0.5f64.powi(k as i32 + 1),
            OffspringKind::Table { pmf } => pmf.iter().skip(k as usize + 1).sum(),
        }
    }

    /// Generating function g(r) = Σ μ(k) r^k on [0, 1].
    pub fn gen_fn(&self, r: f64) -> Result<f64, DistError> {
        if !(0.0..=1.0).contains(&r) {
            return Err(DistError::DomainError(format!("generating function evaluated at {r}")));
        }
        Ok(self.gen_fn_unchecked(r))
    }

    pub(crate) fn gen_fn_unchecked(&self, r: f64) -> f64 {
        match &self.kind {
            OffspringKind::Geometric => 1.0 / (2.0 - r),
            OffspringKind::Table { pmf } => pmf.iter().rev().fold(0.0, |acc, &p| acc * r + p),
        }
    }

    /// F(s) = Σ_k μ([k+1,∞)) s^k = (1 − g(s)) / (1 − s), with F(1) = 1.
    pub fn tail_series(&self, s: f64) -> f64 {
        match &self.kind {
            OffspringKind::Geometric => 1.0 / (2.0 - s),
            OffspringKind::Table { pmf } => {
                // Horner over the tail coefficients avoids cancellation near s = 1
                let mut acc = 0.0;
                let mut tail = 0.0;
                for &p in pmf.iter().skip(1).rev() {
                    tail += p;
                    acc = acc * s + tail;
                }
                acc
            }
        }
    }

    /// Gcd of the positive support values (the step of the group 𝒢).
    pub fn support_gcd(&self) -> u64 {
        match &self.kind {
            OffspringKind::Geometric => 1,
            OffspringKind::Table { pmf } => (1..pmf.len()).filter(|&k| pmf[k] > 0.0).fold(0, |g, k| gcd(g, k as u64)),
        }
    }

    /// Whether a tree with exactly `n` vertices has positive probability.
    pub fn size_feasible(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        let target = n - 1;
        match &self.kind {
            OffspringKind::Geometric => true,
            OffspringKind::Table { pmf } => {
                let g = self.support_gcd();
                if target % g != 0 {
                    return false;
                }
                let parts: Vec<u64> = (1..pmf.len()).filter(|&k| pmf[k] > 0.0).map(|k| k as u64 / g).collect();
                let t = target / g;
                let amax = *parts.iter().max().unwrap();
                // beyond the Frobenius bound every multiple of the gcd is representable
                if t >= amax * amax {
                    return true;
                }
                let mut reach = vec![false; t as usize + 1];
                reach[0] = true;
                for s in 1..=t as usize {
                    reach[s] = parts.iter().any(|&a| a as usize <= s && reach[s - a as usize]);
                }
                reach[t as usize]
            }
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.pmf_alias {
            None => sample_geometric_half(rng),
            Some(a) => a.sample(rng) as u32,
        }
    }

    /// Draws from the tail law k ↦ μ([k+1, ∞)).
    #[inline]
    pub fn sample_tail<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match &self.tail_alias {
            None => sample_geometric_half(rng),
            Some(a) => a.sample(rng) as u32,
        }
    }
}

/// Number of leading fair-coin failures: P(k) = 2^{-(k+1)}.
#[inline]
fn sample_geometric_half<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    let mut k = 0;
    loop {
        let bits: u64 = rng.random();
        if bits != 0 {
            return k + bits.trailing_zeros();
        }
        k += 64;
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn geometric_basics() {
        let mu = make_geometric_critical();
        assert_eq!(mu.pmf(0), 0.5);
        let series_var: f64 = (0..200).map(|k| (k * k) as f64 * 0.5f64.powi(k + 1)).sum::<f64>() - 1.0;
        assert_abs_diff_eq!(mu.variance, series_var, epsilon = 1e-12);
        assert_eq!(mu.tail(0), 0.5);
        assert_eq!(mu.tail(3), 1.0 / 16.0);
        assert_eq!(mu.gen_fn(0.0).unwrap(), 0.5);
        let series: f64 = (0..200).map(|k| 0.5f64.powi(k + 1) * 0.5f64.powi(k)).sum();
        assert_abs_diff_eq!(mu.gen_fn(0.5).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(series, 2.0 / 3.0, epsilon = 1e-15);
        assert!(mu.gen_fn(1.5).is_err());
    }

    #[test]
    fn table_validation() {
        let b = make_offspring(&[(0, 0.5), (2, 0.5)]).unwrap();
        assert_abs_diff_eq!(b.variance, 1.0, epsilon = 1e-15);
        assert_eq!(make_offspring(&[(1, 1.0)]).unwrap_err(), DistError::Degenerate);
        assert!(matches!(make_offspring(&[(0, 0.3), (1, 0.7)]), Err(DistError::NotCritical { .. })));
        assert!(matches!(make_offspring(&[(0, 0.3), (2, 0.3)]), Err(DistError::NotNormalized { .. })));
        assert!(matches!(make_offspring(&[(0, 0.5), (0, 0.5)]), Err(DistError::InvalidEntry(_))));
    }

    #[test]
    fn truncated_and_power_law_are_critical() {
        let t = OffspringDistribution::truncated("t", &[(0, 0.5), (1, 0.25)], 2).unwrap_err();
        assert!(matches!(t, DistError::NotCritical { .. }));
        let t = OffspringDistribution::truncated("t", &[(0, 0.5), (1, 0.2), (2, 0.2)], 4).unwrap();
        assert_abs_diff_eq!(t.pmf(4), 0.1, epsilon = 1e-15);
        let p = OffspringDistribution::power_law(1.5, 1000).unwrap();
        assert!(p.variance > 10.0);
        assert!(p.max_value() == Some(1000));
    }

    #[test]
    fn tail_series_identity() {
        for mu in [make_geometric_critical(), make_offspring(&[(0, 0.5), (2, 0.5)]).unwrap()] {
            for i in 0..10 {
                let r = i as f64 / 10.0;
                let lhs = mu.tail_series(r);
                let rhs = (1.0 - mu.gen_fn(r).unwrap()) / (1.0 - r);
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(mu.tail_series(1.0), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn feasibility() {
        let b = make_offspring(&[(0, 0.5), (2, 0.5)]).unwrap();
        assert!(!b.size_feasible(4));
        assert!(b.size_feasible(5));
        let c = make_offspring(&[(0, 0.6), (2, 0.2), (3, 0.2)]).unwrap();
        assert!(!c.size_feasible(2));
        assert!(c.size_feasible(3));
        assert!(c.size_feasible(4));
        assert!(c.size_feasible(1));
    }

    #[test]
    fn geometric_sampler_mean() {
        let mu = make_geometric_critical();
        let mut rng = stream(11, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| mu.sample(&mut rng) as f64).sum::<f64>() / n as f64;
        let se = (2.0f64 / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn table_tail_sampler_law() {
        let mu = make_offspring(&[(0, 0.5), (1, 0.1), (2, 0.3), (3, 0.1)]).unwrap();
        let mut rng = stream(5, 1);
        let n = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[mu.sample_tail(&mut rng) as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let p = mu.tail(k as u32);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((c as f64 / n as f64 - p).abs() < 4.0 * se);
        }
    }
}
