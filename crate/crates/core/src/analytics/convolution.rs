//! Dense k-step transition probabilities on a box.

use super::AnalyticsError;
use crate::distributions::JumpDistribution;
use crate::lattice::{Point, MAX_DIM};

/// Default cap on the number of box points held by a single convolution.
pub const DEFAULT_BOX_BUDGET: u64 = 40_000_000;

/// A real function on the box {|x|_∞ ≤ radius} of ℤ^dim, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    pub dim: usize,
    pub radius: i32,
    pub values: Vec<f64>,
}

impl LatticeFunction {
    pub fn delta(dim: usize) -> Self {
        LatticeFunction { dim, radius: 0, values: vec![1.0] }
    }

    fn side(&self) -> usize {
        (2 * self.radius + 1) as usize
    }

    /// Linear index of `x`, or `None` outside the box.
    #[inline]
    pub fn index(&self, x: &Point) -> Option<usize> {
        let side = self.side();
        let mut idx = 0usize;
        for i in (0..self.dim).rev() {
            let c = x.0[i];
            if c.abs() > self.radius {
                return None;
            }
            idx = idx * side + (c + self.radius) as usize;
        }
        Some(idx)
    }

    pub fn point(&self, mut idx: usize) -> Point {
        let side = self.side();
        let mut c = [0i32; MAX_DIM];
        for ci in c.iter_mut().take(self.dim) {
            *ci = (idx % side) as i32 - self.radius;
            idx /= side;
        }
        Point(c)
    }

    #[inline]
    pub fn get(&self, x: &Point) -> f64 {
        self.index(x).map_or(0.0, |i| self.values[i])
    }

    pub fn mass(&self) -> f64 {
        // pairwise summation keeps the rounding drift near machine precision
        fn psum(v: &[f64]) -> f64 {
            if v.len() <= 64 {
                v.iter().sum()
            } else {
                let (a, b) = v.split_at(v.len() / 2);
                psum(a) + psum(b)
            }
        }
        psum(&self.values)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Largest |f(x) − f(−x)|.
    pub fn asymmetry(&self) -> f64 {
        (0..self.values.len())
            .map(|i| (self.values[i] - self.get(&-self.point(i))).abs())
            .fold(0.0, f64::max)
    }

    /// Convolution with θ: x ↦ Σ_y θ(y) f(x − y).
    pub fn step(&self, theta: &JumpDistribution, budget: u64) -> Result<LatticeFunction, AnalyticsError> {
        let r = theta.radius();
        let new_radius = self.radius + r;
        let new_side = (2 * new_radius + 1) as u64;
        let points = new_side.pow(self.dim as u32);
        if points > budget {
            return Err(AnalyticsError::BoxBudgetExceeded { points, budget });
        }
        let mut out = LatticeFunction { dim: self.dim, radius: new_radius, values: vec![0.0; points as usize] };
        let offsets: Vec<(isize, f64)> = theta
            .support
            .iter()
            .map(|(y, p)| {
                let mut off = 0isize;
                for i in (0..self.dim).rev() {
                    off = off * new_side as isize + y.0[i] as isize;
                }
                (off, *p)
            })
            .collect();
        let side = self.side();
        let mut coord = vec![0usize; self.dim];
        for &v in &self.values {
            if v != 0.0 {
                let mut j = 0usize;
                for i in (0..self.dim).rev() {
                    j = j * new_side as usize + coord[i] + r as usize;
                }
                for &(off, p) in &offsets {
                    out.values[(j as isize + off) as usize] += v * p;
                }
            }
            // odometer over the old box
            for c in coord.iter_mut() {
                *c += 1;
                if *c < side {
                    break;
                }
                *c = 0;
            }
        }
        Ok(out)
    }
}

/// The law of S_k as a function on the smallest enclosing box.
pub fn step_pmf_power(theta: &JumpDistribution, k: u32, budget: u64) -> Result<LatticeFunction, AnalyticsError> {
    let mut f = LatticeFunction::delta(theta.dim);
    for _ in 0..k {
        f = f.step(theta, budget)?;
    }
    Ok(f)
}

/// p_k(0) for k = 0..=kmax by repeated convolution.
pub fn return_probabilities_dp(theta: &JumpDistribution, kmax: u32, budget: u64) -> Result<Vec<f64>, AnalyticsError> {
    let mut f = LatticeFunction::delta(theta.dim);
    let mut out = vec![1.0];
    for _ in 0..kmax {
        f = f.step(theta, budget)?;
        out.push(f.get(&Point::ORIGIN));
    }
    Ok(out)
}
