use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rustc_hash::FxHashMap;

use super::lattice_group::{lattice_certificate, LatticeCertificate};
use super::DistError;
use crate::lattice::{Point, MAX_DIM};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
enum JumpSampler {
    Uniform(u32),
    Alias(WeightedAliasIndex<f64>),
}

/// Per-axis decomposition of a law supported on {0, ±e_i} with θ(e_i) = θ(−e_i).
#[derive(Debug, Clone, PartialEq)]
pub struct AxisStructure {
    /// w_i = θ(e_i) + θ(−e_i).
    pub weights: Vec<f64>,
    /// θ(0).
    pub hold: f64,
}

/// A finitely supported jump law θ on ℤ^d.
#[derive(Debug, Clone)]
pub struct JumpDistribution {
    pub dim: usize,
    pub support: Vec<(Point, f64)>,
    pub symmetric: bool,
    pub centered: bool,
    /// Row-major d×d covariance matrix M_θ.
    pub covariance: Vec<f64>,
    /// (det M_θ)^{1/d}.
    pub sigma2: f64,
    /// Period of the walk, `None` when return times are unbounded below by a lattice argument
    /// (support differences of lower rank).
    pub period: Option<u32>,
    pub certificate: LatticeCertificate,
    sampler: JumpSampler,
    points: Vec<Point>,
}

/// Simple random walk on ℤ^d.
pub fn make_jump_srw(dim: usize) -> JumpDistribution {
    assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
    let p = 1.0 / (2 * dim) as f64;
    let support: Vec<(Point, f64)> = (0..dim).flat_map(|i| [(Point::unit(i), p), (-Point::unit(i), p)]).collect();
    JumpDistribution::from_table(dim, support).expect("simple random walk is valid")
}

impl JumpDistribution {
    /// Validated adapted law.
    pub fn from_table(dim: usize, support: Vec<(Point, f64)>) -> Result<Self, DistError> {
        let theta = Self::unchecked_adaptedness(dim, support)?;
        theta.adaptedness_check()?;
        Ok(theta)
    }

    /// Validates everything except adaptedness. Used for deterministic fixtures.
    pub fn unchecked_adaptedness(dim: usize, support: Vec<(Point, f64)>) -> Result<Self, DistError> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(DistError::DomainError(format!("dimension {dim} out of range 1..={MAX_DIM}")));
        }
        if support.is_empty() {
            return Err(DistError::InvalidEntry("empty support".into()));
        }
        let mut seen = FxHashMap::default();
        for (x, p) in &support {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(DistError::InvalidEntry(format!("mass {p} at {x:?}")));
            }
            if x.0[dim..].iter().any(|&c| c != 0) {
                return Err(DistError::InvalidEntry(format!("{x:?} has more than {dim} coordinates")));
            }
            if seen.insert(*x, *p).is_some() {
                return Err(DistError::InvalidEntry(format!("repeated support point {x:?}")));
            }
        }
        let sum: f64 = support.iter().map(|s| s.1).sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(DistError::NotNormalized { sum });
        }
        let support: Vec<(Point, f64)> = support.into_iter().filter(|s| s.1 > 0.0).collect();
        let symmetric = support.iter().all(|(x, p)| seen.get(&-*x) == Some(p));
        let centered = exact_mean_is_zero(dim, &support);
        let mut cov = vec![0.0; dim * dim];
        for (x, p) in &support {
            for i in 0..dim {
                for j in 0..dim {
                    cov[i * dim + j] += p * x.0[i] as f64 * x.0[j] as f64;
                }
            }
        }
        if !centered {
            let mean: Vec<f64> = (0..dim).map(|i| support.iter().map(|(x, p)| p * x.0[i] as f64).sum()).collect();
            for i in 0..dim {
                for j in 0..dim {
                    cov[i * dim + j] -= mean[i] * mean[j];
                }
            }
        }
        let det = determinant(&cov, dim);
        let sigma2 = det.max(0.0).powf(1.0 / dim as f64);
        let points: Vec<Point> = support.iter().map(|s| s.0).collect();
        let certificate = lattice_certificate(dim, &points);
        let base = points[0];
        let diffs: Vec<Point> = points.iter().map(|&x| x - base).collect();
        let diff_cert = lattice_certificate(dim, &diffs);
        let period = match (diff_cert.index(), certificate.index()) {
            (Some(a), Some(b)) => Some((a / b) as u32),
            _ => None,
        };
        let first = support[0].1;
        let sampler = if support.iter().all(|s| s.1 == first) {
            JumpSampler::Uniform(support.len() as u32)
        } else {
            JumpSampler::Alias(
                WeightedAliasIndex::new(support.iter().map(|s| s.1).collect())
                    .map_err(|e| DistError::InvalidEntry(e.to_string()))?,
            )
        };
        Ok(JumpDistribution { dim, support, symmetric, centered, covariance: cov, sigma2, period, certificate, sampler, points })
    }

    /// Confirms that the support generates ℤ^d, returning the normal forms as certificate.
    pub fn adaptedness_check(&self) -> Result<&LatticeCertificate, DistError> {
        if self.certificate.is_full() {
            Ok(&self.certificate)
        } else {
            Err(DistError::NotAdapted { index: self.certificate.index().unwrap_or(0), certificate: self.certificate.clone() })
        }
    }

    pub fn is_adapted(&self) -> bool {
        self.certificate.is_full()
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let i = match &self.sampler {
            JumpSampler::Uniform(n) => rng.random_range(0..*n) as usize,
            JumpSampler::Alias(a) => a.sample(rng),
        };
        self.points[i]
    }

    /// θ(x).
    pub fn prob(&self, x: &Point) -> f64 {
        self.support.iter().find(|s| s.0 == *x).map_or(0.0, |s| s.1)
    }

    /// Largest |x|_∞ over the support.
    pub fn radius(&self) -> i32 {
        self.points.iter().map(|p| p.norm_inf()).max().unwrap_or(0)
    }

    /// Decomposition along coordinate axes when the support lies in {0, ±e_i} symmetrically.
    pub fn axis_structure(&self) -> Option<AxisStructure> {
        let mut weights = vec![0.0; self.dim];
        let mut hold = 0.0;
        for (x, p) in &self.support {
            if x.is_origin() {
                hold = *p;
                continue;
            }
            let nz: Vec<usize> = (0..self.dim).filter(|&i| x.0[i] != 0).collect();
            if nz.len() != 1 || x.0[nz[0]].abs() != 1 {
                return None;
            }
            weights[nz[0]] += p;
        }
        if !self.symmetric || weights.contains(&0.0) {
            return None;
        }
        Some(AxisStructure { weights, hold })
    }

    /// Whether θ is invariant under coordinate permutations and sign changes.
    pub fn is_hyperoctahedral(&self) -> bool {
        let mut classes: FxHashMap<Point, (usize, f64)> = FxHashMap::default();
        for (x, p) in &self.support {
            let e = classes.entry(canonical(x, self.dim)).or_insert((0, *p));
            if e.1 != *p {
                return false;
            }
            e.0 += 1;
        }
        classes.iter().all(|(c, (count, _))| *count as u64 == orbit_size(c, self.dim))
    }

    pub fn covariance_det(&self) -> f64 {
        determinant(&self.covariance, self.dim)
    }

    /// Inverse covariance, row-major.
    pub fn covariance_inverse(&self) -> Vec<f64> {
        invert(&self.covariance, self.dim)
    }

    /// Leading-order Green function Γ(d/2−1)/(2π^{d/2}√det M) · (x·M⁻¹x)^{1−d/2}, for d ≥ 3.
    pub fn green_asymptotic(&self, x: &Point) -> f64 {
        GreenAsymptotic::new(self).eval(x)
    }
}

/// Precomputed constants for the leading-order Green function.
#[derive(Debug, Clone)]
pub struct GreenAsymptotic {
    dim: usize,
    inv: Vec<f64>,
    pref: f64,
}

impl GreenAsymptotic {
    pub fn new(theta: &JumpDistribution) -> Self {
        let d = theta.dim;
        let det = determinant(&theta.covariance, d);
        let half = d as f64 / 2.0;
        let pref = statrs::function::gamma::gamma(half - 1.0) / (2.0 * std::f64::consts::PI.powf(half) * det.sqrt());
        GreenAsymptotic { dim: d, inv: theta.covariance_inverse(), pref }
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        let d = self.dim;
        let mut q = 0.0;
        for i in 0..d {
            for j in 0..d {
                q += x.0[i] as f64 * self.inv[i * d + j] * x.0[j] as f64;
            }
        }
        self.pref * q.powf(1.0 - d as f64 / 2.0)
    }
}

/// Sorted absolute coordinates: representative of a point's hyperoctahedral orbit.
#[inline]
pub fn canonical(x: &Point, dim: usize) -> Point {
    let mut c = [0i32; MAX_DIM];
    for i in 0..dim {
        c[i] = x.0[i].abs();
    }
    c[..dim].sort_unstable_by(|a, b| b.cmp(a));
    Point(c)
}

/// Number of points in the orbit of a canonical point under signed permutations.
pub fn orbit_size(c: &Point, dim: usize) -> u64 {
    let mut fact = vec![1u64; dim + 1];
    for i in 1..=dim {
        fact[i] = fact[i - 1] * i as u64;
    }
    let mut perms = fact[dim];
    let mut i = 0;
    while i < dim {
        let mut j = i;
        while j < dim && c.0[j] == c.0[i] {
            j += 1;
        }
        perms /= fact[j - i];
        i = j;
    }
    let nonzero = c.0[..dim].iter().filter(|&&v| v != 0).count();
    perms << nonzero
}

fn exact_mean_is_zero(dim: usize, support: &[(Point, f64)]) -> bool {
    (0..dim).all(|i| {
        let mut s = BigRational::zero();
        for (x, p) in support {
            if x.0[i] != 0 {
                s += BigRational::from_float(*p).expect("finite") * BigRational::from_integer(x.0[i].into());
            }
        }
        s.is_zero()
    })
}

pub(crate) fn determinant(m: &[f64], n: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs())).unwrap();
        if a[piv * n + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..n {
                a.swap(c * n + j, piv * n + j);
            }
            det = -det;
        }
        det *= a[c * n + c];
        for i in c + 1..n {
            let f = a[i * n + c] / a[c * n + c];
            for j in c..n {
                a[i * n + j] -= f * a[c * n + j];
            }
        }
    }
    det
}

fn invert(m: &[f64], n: usize) -> Vec<f64> {
    let mut a = m.to_vec();
    let mut inv: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs())).unwrap();
        for j in 0..n {
            a.swap(c * n + j, piv * n + j);
            inv.swap(c * n + j, piv * n + j);
        }
        let d = a[c * n + c];
        for j in 0..n {
            a[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for i in 0..n {
            if i != c {
                let f = a[i * n + c];
                for j in 0..n {
                    a[i * n + j] -= f * a[c * n + j];
                    inv[i * n + j] -= f * inv[c * n + j];
                }
            }
        }
    }
    inv
}
