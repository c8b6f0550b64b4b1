//! Exact identities for the one-dimensional simple walk.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::AnalyticsError;

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

fn pow2(k: u64) -> BigUint {
    BigUint::one() << k
}

/// P₀(ζ_k = m) exactly.
pub fn srw_point_prob(k: u64, m: i64) -> BigRational {
    if m.unsigned_abs() > k || (k as i64 + m) % 2 != 0 {
        return BigRational::zero();
    }
    BigRational::new(binomial(k, (k as i64 + m) as u64 / 2).into(), pow2(k).into())
}

/// Path counts of the walk started at m and killed on reaching −1: entry k of the
/// result is the number of k-step paths that first reach −1 at step k.
fn first_passage_counts(m: u64, kmax: u64) -> Vec<BigUint> {
    let levels = (m + kmax + 2) as usize;
    let mut cur = vec![BigUint::zero(); levels];
    cur[m as usize] = BigUint::one();
    let mut out = vec![BigUint::zero(); kmax as usize + 1];
    for k in 1..=kmax as usize {
        let mut next = vec![BigUint::zero(); levels];
        for (h, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if h == 0 {
                out[k] += c;
            } else {
                next[h - 1] += c;
            }
            if h + 1 < levels {
                next[h + 1] += c;
            }
        }
        cur = next;
    }
    out
}

fn check_parity(m: u64, k: u64) -> Result<(), AnalyticsError> {
    if k <= m || (k + m) % 2 == 0 {
        return Err(AnalyticsError::ParityError(format!("need k > m and k + m odd, got m = {m}, k = {k}")));
    }
    Ok(())
}

/// (P_m(T = k) by dynamic programming, ((m+1)/k) P₀(ζ_k = m+1) by the binomial formula).
pub fn kemperman_check(m: u64, k: u64) -> Result<(BigRational, BigRational), AnalyticsError> {
    check_parity(m, k)?;
    let counts = first_passage_counts(m, k);
    Ok((BigRational::new(counts[k as usize].clone().into(), pow2(k).into()), kemperman_rhs(m, k)))
}

fn kemperman_rhs(m: u64, k: u64) -> BigRational {
    BigRational::new((m + 1).into(), k.into()) * srw_point_prob(k, m as i64 + 1)
}

/// Checks the identity on every admissible (m, k) with m ≤ mmax, k ≤ kmax; returns the
/// number of pairs checked and the first mismatch, if any.
pub fn kemperman_grid(mmax: u64, kmax: u64) -> (usize, Option<(u64, u64)>) {
    let mut checked = 0;
    for m in 0..=mmax {
        let counts = first_passage_counts(m, kmax);
        for k in (m + 1..=kmax).filter(|k| (k + m) % 2 == 1) {
            let lhs = BigRational::new(counts[k as usize].clone().into(), pow2(k).into());
            checked += 1;
            if lhs != kemperman_rhs(m, k) {
                return (checked, Some((m, k)));
            }
        }
    }
    (checked, None)
}

/// Relative error of the Gaussian main term √(2/(πk)) e^{−m²/(2k)} against P₀(ζ_k = m).
pub fn llt_compare(k: u64, m: i64) -> Result<f64, AnalyticsError> {
    if m.unsigned_abs() > k || (k as i64 + m) % 2 != 0 {
        return Err(AnalyticsError::ParityError(format!("need |m| ≤ k and k + m even, got k = {k}, m = {m}")));
    }
    let exact = srw_point_prob_f64(k, m);
    let kf = k as f64;
    let main = (2.0 / (std::f64::consts::PI * kf)).sqrt() * (-(m * m) as f64 / (2.0 * kf)).exp();
    Ok(exact / main - 1.0)
}

/// P₀(ζ_k = m) in floating point via log-gamma.
pub fn srw_point_prob_f64(k: u64, m: i64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    if m.unsigned_abs() > k || (k as i64 + m) % 2 != 0 {
        return 0.0;
    }
    let j = (k as i64 + m) as f64 / 2.0;
    let kf = k as f64;
    (ln_gamma(kf + 1.0) - ln_gamma(j + 1.0) - ln_gamma(kf - j + 1.0) - kf * std::f64::consts::LN_2).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn small_cases() {
        assert_eq!(kemperman_check(0, 1).unwrap(), (r(1, 2), r(1, 2)));
        assert_eq!(kemperman_check(0, 3).unwrap(), (r(1, 8), r(1, 8)));
        assert!(kemperman_check(0, 2).is_err());
        assert!(kemperman_check(3, 2).is_err());
    }

    #[test]
    fn small_grid() {
        let (n, bad) = kemperman_grid(10, 51);
        assert!(bad.is_none());
        assert!(n > 200);
    }

    #[test]
    fn llt_relative_error() {
        assert!(llt_compare(10_000, 0).unwrap().abs() < 1e-3);
        assert!(llt_compare(100, 100).unwrap().is_finite());
        let e1 = llt_compare(100, 10).unwrap().abs();
        let e2 = llt_compare(400, 20).unwrap().abs();
        let e3 = llt_compare(1600, 40).unwrap().abs();
        assert!(e1 > e2 && e2 > e3);
        assert!(llt_compare(5, 2).is_err());
    }

    #[test]
    fn float_matches_exact() {
        use num_traits::ToPrimitive;
        let e = srw_point_prob(60, 4).to_f64().unwrap();
        assert!((srw_point_prob_f64(60, 4) / e - 1.0).abs() < 1e-12);
    }
}
