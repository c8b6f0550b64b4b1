//! Law of X_k = ζ_k − 2 min_{j ≤ k} ζ_j and the exact head-return probability.

use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use rustc_hash::FxHashMap;

use super::SnakeError;
use crate::analytics::{return_probabilities, srw_point_prob, srw_point_prob_f64};
use crate::distributions::JumpDistribution;
use crate::lattice::Point;

fn check(k: u64, m: u64) -> Result<(), SnakeError> {
    if m > k || (k + m) % 2 != 0 {
        return Err(SnakeError::DomainError(format!("need m ≤ k and k + m even, got k = {k}, m = {m}")));
    }
    Ok(())
}

/// P(X_k = m) = 2(m+1)²/(k+m+2) · P₀(Y_k = m), exactly.
pub fn pitman_pmf(k: u64, m: u64) -> Result<BigRational, SnakeError> {
    check(k, m)?;
    let f = BigRational::new((2 * (m + 1) * (m + 1)).into(), (k + m + 2).into());
    Ok(f * srw_point_prob(k, m as i64))
}

pub fn pitman_pmf_f64(k: u64, m: u64) -> Result<f64, SnakeError> {
    check(k, m)?;
    let mf = m as f64;
    Ok(2.0 * (mf + 1.0).powi(2) / (k as f64 + mf + 2.0) * srw_point_prob_f64(k, m as i64))
}

/// P(Ŵ_k = Ŵ_0) = Σ_m P(X_k = m) p_m(0).
pub fn head_return_exact(theta: &JumpDistribution, k: u64) -> Result<f64, SnakeError> {
    Ok(head_return_table(theta, &[k])?[0])
}

/// Head-return probabilities for several k sharing one table of p_m(0).
pub fn head_return_table(theta: &JumpDistribution, ks: &[u64]) -> Result<Vec<f64>, SnakeError> {
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let p = return_probabilities(theta, kmax as usize)?;
    ks.iter()
        .map(|&k| {
            let mut acc = 0.0;
            for m in (k % 2..=k).step_by(2) {
                acc += pitman_pmf_f64(k, m)? * p[m as usize];
            }
            Ok(acc)
        })
        .collect()
}

/// p_k(0) for k = 0..=kmax in exact arithmetic (θ's weights are read as exact binary fractions).
pub fn return_probabilities_exact(theta: &JumpDistribution, kmax: usize) -> Vec<BigRational> {
    let steps: Vec<(Point, BigRational)> =
        theta.support.iter().map(|(x, p)| (*x, BigRational::from_f64(*p).expect("finite weight"))).collect();
    let mut cur: FxHashMap<Point, BigRational> = FxHashMap::default();
    cur.insert(Point::ORIGIN, BigRational::from_integer(1.into()));
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(BigRational::from_integer(1.into()));
    for _ in 0..kmax {
        let mut next: FxHashMap<Point, BigRational> = FxHashMap::default();
        for (y, q) in &cur {
            for (x, p) in &steps {
                *next.entry(*y + *x).or_insert_with(BigRational::zero) += q * p;
            }
        }
        out.push(next.get(&Point::ORIGIN).cloned().unwrap_or_else(BigRational::zero));
        cur = next;
    }
    out
}

/// Exact head-return probability for small k.
pub fn head_return_exact_rational(theta: &JumpDistribution, k: u64) -> Result<BigRational, SnakeError> {
    let p = return_probabilities_exact(theta, k as usize);
    let mut acc = BigRational::zero();
    for m in (k % 2..=k).step_by(2) {
        acc += pitman_pmf(k, m)? * &p[m as usize];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::make_jump_srw;
    use num_traits::One;

    /// Counts of X_k over all 2^k lifetime paths.
    fn enumerate(k: u32) -> Vec<u64> {
        let mut counts = vec![0u64; k as usize + 1];
        for bits in 0u64..(1 << k) {
            let (mut z, mut mn) = (0i64, 0i64);
            for i in 0..k {
                z += if bits >> i & 1 == 1 { 1 } else { -1 };
                mn = mn.min(z);
            }
            counts[(z - 2 * mn) as usize] += 1;
        }
        counts
    }

    #[test]
    fn matches_enumeration() {
        for k in 1..=16u32 {
            let counts = enumerate(k);
            let total = BigRational::from_integer((1u64 << k).into());
            let mut sum = BigRational::zero();
            for (m, &c) in counts.iter().enumerate() {
                let exact = if (k as usize + m) % 2 == 0 { pitman_pmf(k as u64, m as u64).unwrap() } else { BigRational::zero() };
                assert_eq!(exact, BigRational::from_integer(c.into()) / &total, "k = {k}, m = {m}");
                sum += exact;
            }
            assert!(sum.is_one());
        }
    }

    #[test]
    fn parity_is_rejected() {
        assert!(pitman_pmf(3, 2).is_err());
        assert!(pitman_pmf(3, 5).is_err());
        assert!(pitman_pmf_f64(4, 1).is_err());
    }

    #[test]
    fn two_steps_in_four_dimensions() {
        let theta = make_jump_srw(4);
        let q = head_return_exact_rational(&theta, 2).unwrap();
        assert_eq!(q, BigRational::new(11.into(), 32.into()));
        assert!((head_return_exact(&theta, 2).unwrap() - 11.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn float_matches_rational() {
        let theta = make_jump_srw(3);
        let exact = return_probabilities_exact(&theta, 12);
        let ks: Vec<u64> = (1..=12).collect();
        let fl = head_return_table(&theta, &ks).unwrap();
        for &k in &ks {
            let mut acc = BigRational::zero();
            for m in (k % 2..=k).step_by(2) {
                acc += pitman_pmf(k, m).unwrap() * &exact[m as usize];
            }
            let a: f64 = num_traits::ToPrimitive::to_f64(&acc).unwrap();
            assert!((a - fl[k as usize - 1]).abs() < 1e-14, "k = {k}");
        }
    }
}
