//! Four-dimensional Bessel process: ∫_r^t ds/ρ_s² against ½ log(t/r).

use rand::Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use crate::replicate::Replication;
use crate::stats::{ks_two_sample, EstimateRecord, TestOutcome};

use super::AnalyticsError;

fn gaussian4<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> [f64; 4] {
    std::array::from_fn(|_| sd * rng.sample::<f64, _>(StandardNormal))
}

/// One path of Brownian motion in ℝ⁴ from 0, observed on [r, t] with step `dt`;
/// returns the trapezoidal ∫_r^t ds/|B_s|².
fn log_integral_path<R: Rng + ?Sized>(r: f64, t: f64, dt: f64, rng: &mut R) -> f64 {
    let mut b = gaussian4(rng, r.sqrt());
    let inv = |b: &[f64; 4]| 1.0 / b.iter().map(|x| x * x).sum::<f64>();
    let steps = ((t - r) / dt).ceil() as u64;
    let h = (t - r) / steps as f64;
    let sd = h.sqrt();
    let mut prev = inv(&b);
    let mut acc = 0.0;
    for _ in 0..steps {
        let z = gaussian4(rng, sd);
        for i in 0..4 {
            b[i] += z[i];
        }
        let cur = inv(&b);
        acc += 0.5 * h * (prev + cur);
        prev = cur;
    }
    acc
}

fn check(r: f64, t: f64, dt: f64) -> Result<(), AnalyticsError> {
    if !(r >= 1.0 && t > r && dt > 0.0 && dt <= 1e-3 * r) {
        return Err(AnalyticsError::DomainError(format!("need 1 ≤ r < t and 0 < dt ≤ 1e-3·r, got r = {r}, t = {t}, dt = {dt}")));
    }
    Ok(())
}

/// Mean of ∫_r^t ds/ρ_s² with ½ log(t/r) reported alongside.
pub fn bessel_log_integral(r: f64, t: f64, dt: f64, rep: &Replication) -> Result<EstimateRecord, AnalyticsError> {
    check(r, t, dt)?;
    let xs = rep.run(|_, rng| log_integral_path(r, t, dt, rng));
    Ok(EstimateRecord::from_samples(&xs, rep.seed, json!({"r": r, "t": t, "dt": dt})).with_extra("half_log_ratio", 0.5 * (t / r).ln()))
}

/// Samples of 2s/ρ_s², whose mean is 1.
pub fn bessel_marginal(s: f64, rep: &Replication) -> EstimateRecord {
    let xs = rep.run(|_, rng| {
        let b = gaussian4(rng, s.sqrt());
        2.0 * s / b.iter().map(|x| x * x).sum::<f64>()
    });
    EstimateRecord::from_samples(&xs, rep.seed, json!({"s": s}))
}

/// Two-sample KS test between the integrals over [r1, λ r1] and [r2, λ r2].
pub fn bessel_scaling_test(r1: f64, r2: f64, lambda: f64, dt: f64, rep: &Replication) -> Result<TestOutcome, AnalyticsError> {
    check(r1, lambda * r1, dt)?;
    check(r2, lambda * r2, dt)?;
    let a = rep.derive(rep.reps, 1).run(|_, rng| log_integral_path(r1, lambda * r1, dt, rng));
    let b = rep.derive(rep.reps, 2).run(|_, rng| log_integral_path(r2, lambda * r2, dt * r2 / r1, rng));
    Ok(ks_two_sample(&a, &b))
}
