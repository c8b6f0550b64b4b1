//! Lattice Green functions G(x) = Σ_k p_k(x).

use std::io::Write;

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::bessel_fn::scaled_bessel_i;
use super::convolution::LatticeFunction;
use super::quadrature::{composite, gauss_legendre};
use super::AnalyticsError;
use crate::distributions::{canonical, AxisStructure, GreenAsymptotic, JumpDistribution};
use crate::lattice::{Point, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GreenMethod {
    /// Continuous-time factorisation into per-axis Bessel kernels, integrated numerically.
    AxisQuadrature,
    /// Partial sums of convolution powers with a tail bound.
    Convolution,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenValue {
    pub value: f64,
    /// Bound (convolution) or estimate (quadrature) of |value − G(x)|.
    pub error: f64,
    pub method: GreenMethod,
    /// Number of convolution steps summed, for the convolution route.
    pub steps: Option<u64>,
}

/// Quadrature for G(x) = (1 − θ(0))^{−1} ∫₀^∞ ∏_i e^{−w_i t} I_{|x_i|}(w_i t) dt.
struct AxisQuadrature {
    weights: Vec<f64>,
    distinct: Vec<f64>,
    which: Vec<usize>,
    scale: f64,
    t_min: f64,
    t_max: f64,
    nodes: Vec<(f64, f64)>,
}

impl AxisQuadrature {
    fn new(axis: &AxisStructure, max_norm2: f64, panel: f64) -> Self {
        let moving = 1.0 - axis.hold;
        let weights: Vec<f64> = axis.weights.iter().map(|w| w / moving).collect();
        let mut distinct: Vec<f64> = Vec::new();
        let which = weights
            .iter()
            .map(|&w| match distinct.iter().position(|&v| v == w) {
                Some(i) => i,
                None => {
                    distinct.push(w);
                    distinct.len() - 1
                }
            })
            .collect();
        let wmin = weights.iter().copied().fold(f64::INFINITY, f64::min);
        let t_min: f64 = 1e-12;
        let t_max = 1e4 * (max_norm2 + 1.0) / wmin;
        let nodes = composite(t_min.ln(), t_max.ln(), panel, &gauss_legendre(10))
            .into_iter()
            .map(|(u, w)| (u.exp(), w * u.exp()))
            .collect();
        AxisQuadrature { weights, distinct, which, scale: 1.0 / moving, t_min, t_max, nodes }
    }

    fn tail(&self, x: &Point) -> f64 {
        let d = self.weights.len() as f64;
        let a: f64 = self.weights.iter().map(|w| (2.0 * std::f64::consts::PI * w).powf(-0.5)).product();
        let c: f64 = self.weights.iter().enumerate().map(|(i, w)| (4.0 * (x.0[i] as f64).powi(2) - 1.0) / (8.0 * w)).sum();
        let t = self.t_max;
        a * (t.powf(1.0 - d / 2.0) / (d / 2.0 - 1.0) - c * t.powf(-d / 2.0) / (d / 2.0))
    }

    fn eval_many(&self, points: &[Point]) -> Vec<f64> {
        let dim = self.weights.len();
        let nmax = points.iter().map(|p| p.norm_inf()).max().unwrap_or(0) as usize;
        let mut acc = vec![0.0; points.len()];
        let mut kern: Vec<Vec<f64>> = vec![Vec::new(); self.distinct.len()];
        for &(t, w) in &self.nodes {
            for (k, &wd) in kern.iter_mut().zip(&self.distinct) {
                *k = scaled_bessel_i(wd * t, nmax);
            }
            for (a, p) in acc.iter_mut().zip(points) {
                let mut prod = w;
                for i in 0..dim {
                    prod *= kern[self.which[i]][p.0[i].unsigned_abs() as usize];
                }
                *a += prod;
            }
        }
        acc.iter()
            .zip(points)
            .map(|(&a, p)| {
                let small = if p.is_origin() { self.t_min } else { 0.0 };
                (a + small + self.tail(p)) * self.scale
            })
            .collect()
    }
}

/// G(x) for a transient θ.
///
/// Axis-type laws use the Bessel factorisation (error estimated by halving the panel
/// width); other laws sum convolution powers until the tail bound
/// Σ_{k>K} max_z p_k(z) ≤ 2 M_K K/(d/2 − 1) drops below `eps`.
pub fn green(theta: &JumpDistribution, x: &Point, eps: f64) -> Result<GreenValue, AnalyticsError> {
    if theta.dim <= 2 {
        return Err(AnalyticsError::NonTransient { dim: theta.dim });
    }
    if let Some(axis) = theta.axis_structure() {
        let fine = AxisQuadrature::new(&axis, x.norm2_sq(), 0.25).eval_many(&[*x])[0];
        let coarse = AxisQuadrature::new(&axis, x.norm2_sq(), 0.5).eval_many(&[*x])[0];
        return Ok(GreenValue { value: fine, error: (fine - coarse).abs() + 1e-14 * fine, method: GreenMethod::AxisQuadrature, steps: None });
    }
    green_convolution(theta, x, eps, super::convolution::DEFAULT_BOX_BUDGET)
}

/// Convolution route with a certified tail bound.
pub fn green_convolution(theta: &JumpDistribution, x: &Point, eps: f64, budget: u64) -> Result<GreenValue, AnalyticsError> {
    if theta.dim <= 2 {
        return Err(AnalyticsError::NonTransient { dim: theta.dim });
    }
    let half = theta.dim as f64 / 2.0;
    let mut f = LatticeFunction::delta(theta.dim);
    let mut sum = f.get(x);
    let mut prev_max = 1.0;
    let mut k = 0u64;
    loop {
        f = f.step(theta, budget)?;
        k += 1;
        sum += f.get(x);
        let m = f.max_value();
        let mk = m.max(prev_max);
        prev_max = m;
        let bound = 2.0 * mk * k as f64 / (half - 1.0);
        if k >= 2 && bound < eps {
            return Ok(GreenValue { value: sum, error: bound, method: GreenMethod::Convolution, steps: Some(k) });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Symmetry {
    /// Invariant under signed coordinate permutations.
    Hyperoctahedral,
    /// Invariant under coordinate sign changes.
    SignFlips,
    None,
}

impl Symmetry {
    pub fn of(theta: &JumpDistribution) -> Symmetry {
        if theta.is_hyperoctahedral() {
            Symmetry::Hyperoctahedral
        } else if theta.axis_structure().is_some() {
            Symmetry::SignFlips
        } else {
            Symmetry::None
        }
    }

    #[inline]
    pub fn key(&self, x: &Point, dim: usize) -> Point {
        match self {
            Symmetry::Hyperoctahedral => canonical(x, dim),
            Symmetry::SignFlips => Point(x.0.map(i32::abs)),
            Symmetry::None => *x,
        }
    }
}

/// Green values on {|x|_∞ ≤ radius}, with the leading-order asymptotic form outside.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub dim: usize,
    pub radius: i32,
    pub symmetry: Symmetry,
    pub method: GreenMethod,
    values: FxHashMap<Point, f64>,
    asym: GreenAsymptotic,
}

/// Representatives of the orbits of the box under `sym`.
fn box_keys(dim: usize, radius: i32, sym: Symmetry) -> Vec<Point> {
    let mut out = Vec::new();
    let mut c = [0i32; MAX_DIM];
    let lo = if sym == Symmetry::None { -radius } else { 0 };
    fn rec(i: usize, dim: usize, lo: i32, radius: i32, sym: Symmetry, c: &mut [i32; MAX_DIM], out: &mut Vec<Point>) {
        if i == dim {
            out.push(Point(*c));
            return;
        }
        let hi = if sym == Symmetry::Hyperoctahedral && i > 0 { c[i - 1] } else { radius };
        for v in lo..=hi {
            c[i] = v;
            rec(i + 1, dim, lo, radius, sym, c, out);
        }
        c[i] = 0;
    }
    rec(0, dim, lo, radius, sym, &mut c, &mut out);
    out
}

impl GreenTable {
    /// Builds the table. Axis-type laws are exact to quadrature accuracy; other laws
    /// use convolution partial sums on the largest box the budget allows, completed
    /// by the Gaussian tail ∫_K^∞ p_t(x) dt.
    pub fn build(theta: &JumpDistribution, radius: i32) -> Result<Self, AnalyticsError> {
        if theta.dim <= 2 {
            return Err(AnalyticsError::NonTransient { dim: theta.dim });
        }
        let symmetry = Symmetry::of(theta);
        let keys = box_keys(theta.dim, radius, symmetry);
        let asym = GreenAsymptotic::new(theta);
        let (vals, method) = match theta.axis_structure() {
            Some(axis) => {
                let max2 = keys.iter().map(|k| k.norm2_sq()).fold(0.0, f64::max);
                (AxisQuadrature::new(&axis, max2, 0.5).eval_many(&keys), GreenMethod::AxisQuadrature)
            }
            None => (convolution_table(theta, &keys, radius)?, GreenMethod::Convolution),
        };
        Ok(GreenTable { dim: theta.dim, radius, symmetry, method, values: keys.into_iter().zip(vals).collect(), asym })
    }

    /// Value stored for `x`, `None` outside the box.
    #[inline]
    pub fn lookup(&self, x: &Point) -> Option<f64> {
        if x.norm_inf() > self.radius {
            return None;
        }
        self.values.get(&self.symmetry.key(x, self.dim)).copied()
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        self.lookup(x).unwrap_or_else(|| self.asym.eval(x))
    }

    pub fn asymptotic(&self, x: &Point) -> f64 {
        self.asym.eval(x)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies the stored value at `x` by `factor` (for negative controls).
    pub fn corrupt(&mut self, x: &Point, factor: f64) {
        let key = self.symmetry.key(x, self.dim);
        if let Some(v) = self.values.get_mut(&key) {
            *v *= factor;
        }
    }

    /// max over |x|_∞ ≤ r of |G(x) − δ₀(x) − Σ_y θ(y) G(x − y)|.
    pub fn harmonic_defect(&self, theta: &JumpDistribution, r: i32) -> f64 {
        let r = r.min(self.radius - theta.radius());
        box_keys(self.dim, r, Symmetry::None)
            .iter()
            .map(|x| {
                let rhs: f64 = if x.is_origin() { 1.0 } else { 0.0 } + theta.support.iter().map(|(y, p)| p * self.eval(&(*x - *y))).sum::<f64>();
                (self.eval(x) - rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV rows `x1,...,xd,value` for the stored representatives.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut keys: Vec<&Point> = self.values.keys().collect();
        keys.sort();
        for k in keys {
            let coords: Vec<String> = k.coords(self.dim).iter().map(|c| c.to_string()).collect();
            writeln!(w, "{},{}", coords.join(","), self.values[k])?;
        }
        Ok(())
    }
}

fn convolution_table(theta: &JumpDistribution, keys: &[Point], radius: i32) -> Result<Vec<f64>, AnalyticsError> {
    let budget = super::convolution::DEFAULT_BOX_BUDGET;
    let r = theta.radius();
    let mut f = LatticeFunction::delta(theta.dim);
    let mut sums: Vec<f64> = keys.iter().map(|k| f.get(k)).collect();
    let mut k = 0u32;
    loop {
        let side = (2 * (f.radius + r) + 1) as u64;
        if side.pow(theta.dim as u32) > budget {
            break;
        }
        f = f.step(theta, budget)?;
        k += 1;
        for (s, key) in sums.iter_mut().zip(keys) {
            *s += f.get(key);
        }
    }
    if (k as i32) * r < radius {
        return Err(AnalyticsError::BoxBudgetExceeded { points: ((2 * radius + 1) as u64).pow(theta.dim as u32), budget });
    }
    // Gaussian continuation Σ_{j>k} p_j(x) ≈ ∫_{k+1/2}^∞ (2πt)^{−d/2} det(M)^{−1/2} e^{−q/(2t)} dt
    let d = theta.dim as f64;
    let det = theta.covariance_det();
    let inv = theta.covariance_inverse();
    let rule = gauss_legendre(20);
    let lo = (k as f64 + 0.5).ln();
    let nodes = composite(lo, lo + 40.0, 0.5, &rule);
    Ok(sums
        .into_iter()
        .zip(keys)
        .map(|(s, x)| {
            let mut q = 0.0;
            for i in 0..theta.dim {
                for j in 0..theta.dim {
                    q += x.0[i] as f64 * inv[i * theta.dim + j] * x.0[j] as f64;
                }
            }
            let tail: f64 = nodes
                .iter()
                .map(|&(u, w)| {
                    let t = u.exp();
                    w * t * (2.0 * std::f64::consts::PI * t).powf(-d / 2.0) / det.sqrt() * (-q / (2.0 * t)).exp()
                })
                .sum();
            s + tail
        })
        .collect())
}

/// Φ(x) = Σ_y G(y) G(x − y)², summed over |y|_∞ ≤ l with a continuum estimate of the rest.
pub fn remark_phi(table: &GreenTable, x: &Point, l: i32) -> f64 {
    let dim = table.dim;
    let mut s = 0.0;
    for y in box_keys(dim, l, Symmetry::None) {
        let g = table.eval(&(*x - y));
        s += table.eval(&y) * g * g;
    }
    // outside the box G(y) ≈ G(x − y) ≈ c|y|^{2−d}; replace the box by the ball of equal volume
    let d = dim as f64;
    let c = table.asymptotic(&Point::unit(0));
    let ball = std::f64::consts::PI.powf(d / 2.0) / statrs::function::gamma::gamma(d / 2.0 + 1.0);
    let r_eff = (2 * l + 1) as f64 / 2.0 * (2f64.powf(d) / ball).powf(1.0 / d);
    let sphere = d * ball;
    if dim >= 4 {
        s += c.powi(3) * sphere * r_eff.powf(6.0 - 2.0 * d) / (2.0 * d - 6.0);
    }
    s
}
