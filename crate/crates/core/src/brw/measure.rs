use rustc_hash::FxHashMap;

use crate::lattice::Point;

/// Finite point measure on ℤ^d: site → positive particle count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointMeasure {
    counts: FxHashMap<Point, u64>,
    total: u64,
}

impl PointMeasure {
    pub fn new() -> Self {
        Self::default()
    }

    /// `p` particles at the origin.
    pub fn at_origin(p: u64) -> Self {
        let mut m = Self::new();
        m.add(Point::ORIGIN, p);
        m
    }

    pub fn from_points(points: &[Point]) -> Self {
        let mut m = Self::new();
        for &x in points {
            m.add(x, 1);
        }
        m
    }

    #[inline]
    pub fn add(&mut self, x: Point, c: u64) {
        if c > 0 {
            *self.counts.entry(x).or_insert(0) += c;
            self.total += c;
        }
    }

    /// ⟨𝒵, 1⟩.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, x: &Point) -> u64 {
        self.counts.get(x).copied().unwrap_or(0)
    }

    /// Number of occupied sites.
    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, &u64)> {
        self.counts.iter()
    }
}
