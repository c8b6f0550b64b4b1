//! Exact return probabilities for walks that move along one coordinate axis per step.

use crate::distributions::AxisStructure;

/// ln(j!) for j = 0..=n.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    for j in 1..=n {
        v[j] = v[j - 1] + (j as f64).ln();
    }
    v
}

/// Return probabilities of the one-dimensional simple walk: C(j, j/2) 2^{−j} for even j.
fn srw1_returns(kmax: usize) -> Vec<f64> {
    let mut q = vec![0.0; kmax + 1];
    q[0] = 1.0;
    let mut j = 0;
    while j + 2 <= kmax {
        q[j + 2] = q[j] * (j + 1) as f64 / (j + 2) as f64;
        j += 2;
    }
    q
}

/// Given return probabilities of two independent coordinate blocks chosen with
/// probabilities a and 1 − a per step, returns those of the combined walk:
/// r_m = Σ_j C(m,j) a^j (1−a)^{m−j} r¹_j r²_{m−j}.
fn binomial_mix(r1: &[f64], r2: &[f64], a: f64, lnf: &[f64]) -> Vec<f64> {
    let kmax = r1.len() - 1;
    let (la, lb) = (a.ln(), (1.0 - a).ln());
    let mut out = vec![0.0; kmax + 1];
    for m in 0..=kmax {
        let mut s = 0.0;
        for j in 0..=m {
            let (x, y) = (r1[j], r2[m - j]);
            if x == 0.0 || y == 0.0 {
                continue;
            }
            let lw = lnf[m] - lnf[j] - lnf[m - j] + j as f64 * la + (m - j) as f64 * lb;
            s += lw.exp() * x * y;
        }
        out[m] = s;
    }
    out
}

/// p_k(0) for k = 0..=kmax, for a law supported on {0, ±e_i} with θ(e_i) = θ(−e_i).
pub fn axis_return_probabilities(axis: &AxisStructure, kmax: usize) -> Vec<f64> {
    let lnf = ln_factorials(kmax);
    let q = srw1_returns(kmax);
    // combine blocks pairwise to keep the mixing weights balanced
    let mut blocks: Vec<(f64, Vec<f64>)> = axis.weights.iter().map(|&w| (w, q.clone())).collect();
    while blocks.len() > 1 {
        let mut next = Vec::with_capacity(blocks.len().div_ceil(2));
        let mut it = blocks.into_iter();
        while let Some((w1, r1)) = it.next() {
            match it.next() {
                Some((w2, r2)) => next.push((w1 + w2, binomial_mix(&r1, &r2, w1 / (w1 + w2), &lnf))),
                None => next.push((w1, r1)),
            }
        }
        blocks = next;
    }
    let moving = blocks.pop().unwrap().1;
    if axis.hold == 0.0 {
        return moving;
    }
    // holding is a block that always returns
    let ones = vec![1.0; kmax + 1];
    binomial_mix(&moving, &ones, 1.0 - axis.hold, &lnf)
}
