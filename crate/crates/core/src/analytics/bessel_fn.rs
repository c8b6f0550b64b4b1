//! Exponentially scaled modified Bessel functions e^{−z} I_ν(z) of integer order.

const HANKEL_MIN_Z: f64 = 200.0;

/// e^{−z} I_ν(z) for ν = 0..=nmax.
pub fn scaled_bessel_i(z: f64, nmax: usize) -> Vec<f64> {
    assert!(z >= 0.0 && z.is_finite(), "Bessel argument {z}");
    let mut out = vec![0.0; nmax + 1];
    if z == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let nn = (nmax * nmax) as f64;
    if z >= HANKEL_MIN_Z && z >= 4.0 * nn {
        for (nu, o) in out.iter_mut().enumerate() {
            *o = hankel(z, nu);
        }
        return out;
    }
    miller(z, &mut out);
    out
}

/// Large-argument expansion e^{−z}I_ν(z) ≈ (2πz)^{−1/2} Σ_k (−1)^k a_k(ν) z^{−k}.
fn hankel(z: f64, nu: usize) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * z);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * z).sqrt()
}

/// Backward recurrence I_{ν−1} = I_{ν+1} + (2ν/z) I_ν from a high order, normalised by
/// e^{−z}(I_0 + 2 Σ_{ν≥1} I_ν) = 1.
fn miller(z: f64, out: &mut [f64]) {
    let nmax = out.len() - 1;
    let start = nmax.max(z as usize) + (30.0 * (z + 1.0).sqrt()) as usize + 50;
    let mut hi = 0.0f64; // I_{ν+1}
    let mut cur = 1e-280f64; // I_ν
    let mut sum = 0.0f64;
    for nu in (0..=start).rev() {
        if nu <= nmax {
            out[nu] = cur;
        }
        sum += if nu == 0 { cur } else { 2.0 * cur };
        if nu == 0 {
            break;
        }
        let lo = hi + (2.0 * nu as f64 / z) * cur;
        hi = cur;
        cur = lo;
        if cur > 1e250 {
            let s = 1e-250;
            cur *= s;
            hi *= s;
            sum *= s;
            for o in out.iter_mut().skip(nu - 1) {
                *o *= s;
            }
        }
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}
