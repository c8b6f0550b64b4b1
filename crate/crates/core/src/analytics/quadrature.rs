//! Gauss–Legendre rules.

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite rule on [a, b] with panels of width at most `h`.
pub fn composite(a: f64, b: f64, h: f64, rule: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let panels = ((b - a) / h).ceil().max(1.0) as usize;
    let w = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        for &(x, wt) in rule {
            out.push((mid + 0.5 * w * x, 0.5 * w * wt));
        }
    }
    out
}
