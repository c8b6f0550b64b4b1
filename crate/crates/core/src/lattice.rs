//! Lattice points of ℤ^d and visited-site sets.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 8;

/// A point of ℤ^d for d ≤ [`MAX_DIM`]. Unused trailing coordinates are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Point(pub [i32; MAX_DIM]);

impl Point {
    pub const ORIGIN: Point = Point([0; MAX_DIM]);

    /// Builds a point from a coordinate slice. Panics if the slice is longer than `MAX_DIM`.
    pub fn from_slice(xs: &[i32]) -> Self {
        assert!(xs.len() <= MAX_DIM, "dimension {} exceeds {}", xs.len(), MAX_DIM);
        let mut c = [0; MAX_DIM];
        c[..xs.len()].copy_from_slice(xs);
        Point(c)
    }

    /// Unit vector along axis `i`.
    pub fn unit(i: usize) -> Self {
        let mut c = [0; MAX_DIM];
        c[i] = 1;
        Point(c)
    }

    pub fn coords(&self, dim: usize) -> &[i32] {
        &self.0[..dim]
    }

    pub fn is_origin(&self) -> bool {
        self.0 == [0; MAX_DIM]
    }

    pub fn norm_inf(&self) -> i32 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn norm_l1(&self) -> i64 {
        self.0.iter().map(|&c| (c as i64).abs()).sum()
    }

    pub fn norm2_sq(&self) -> f64 {
        self.0.iter().map(|&c| (c as f64) * (c as f64)).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.norm2_sq().sqrt()
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.0.iter().rposition(|&c| c != 0).map_or(1, |i| i + 1);
        f.debug_list().entries(&self.0[..last]).finish()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(mut self, rhs: Point) -> Point {
        self += rhs;
        self
    }
}

impl AddAssign for Point {
    #[inline]
    fn add_assign(&mut self, rhs: Point) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(mut self, rhs: Point) -> Point {
        self -= rhs;
        self
    }
}

impl SubAssign for Point {
    #[inline]
    fn sub_assign(&mut self, rhs: Point) {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point(self.0.map(|c| -c))
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let last = self.0.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
        self.0[..last].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<i32>::deserialize(d)?;
        if v.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "point has {} coordinates, at most {MAX_DIM} supported",
                v.len()
            )));
        }
        Ok(Point::from_slice(&v))
    }
}

/// Packs the first `dim` coordinates into `bits`-bit two's complement fields.
/// Returns `None` when a coordinate does not fit.
#[inline]
fn pack64(p: &Point, dim: usize, bits: u32) -> Option<u64> {
    let lim = 1i64 << (bits - 1);
    let mask = (1u64 << bits) - 1;
    let mut key = 0u64;
    for &c in &p.0[..dim] {
        let c = c as i64;
        if c < -lim || c >= lim {
            return None;
        }
        key = (key << bits) | (c as u64 & mask);
    }
    Some(key)
}

#[inline]
fn pack128(p: &Point, dim: usize, bits: u32) -> Option<u128> {
    let lim = 1i64 << (bits - 1);
    let mask = (1u128 << bits) - 1;
    let mut key = 0u128;
    for &c in &p.0[..dim] {
        let c = c as i64;
        if c < -lim || c >= lim {
            return None;
        }
        key = (key << bits) | (c as i128 as u128 & mask);
    }
    Some(key)
}

#[derive(Clone, Debug)]
enum Keys {
    Packed64(FxHashSet<u64>),
    Packed128(FxHashSet<u128>),
    Wide(FxHashSet<Point>),
}

/// Set of visited lattice sites.
///
/// Points are packed into a single `u64` while every coordinate fits in `64 / dim` bits,
/// then into a `u128`, then stored as full points. Migration between layouts is
/// automatic and never wraps.
#[derive(Clone, Debug)]
pub struct SiteSet {
    dim: usize,
    bits64: u32,
    bits128: u32,
    keys: Keys,
}

impl SiteSet {
    pub fn new(dim: usize) -> Self {
        Self::with_capacity(dim, 0)
    }

    pub fn with_capacity(dim: usize, cap: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension {dim} out of range");
        let bits64 = (64 / dim as u32).min(32);
        let bits128 = (128 / dim as u32).min(32);
        let mut set = FxHashSet::default();
        set.reserve(cap);
        SiteSet { dim, bits64, bits128, keys: Keys::Packed64(set) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Inserts `p`; returns true if it was not present.
    #[inline]
    pub fn insert(&mut self, p: Point) -> bool {
        match &mut self.keys {
            Keys::Packed64(s) => {
                if let Some(k) = pack64(&p, self.dim, self.bits64) {
                    return s.insert(k);
                }
            }
            Keys::Packed128(s) => {
                if let Some(k) = pack128(&p, self.dim, self.bits128) {
                    return s.insert(k);
                }
            }
            Keys::Wide(s) => return s.insert(p),
        }
        self.widen(&p);
        self.insert(p)
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        match &self.keys {
            Keys::Packed64(s) => pack64(p, self.dim, self.bits64).is_some_and(|k| s.contains(&k)),
            Keys::Packed128(s) => pack128(p, self.dim, self.bits128).is_some_and(|k| s.contains(&k)),
            Keys::Wide(s) => s.contains(p),
        }
    }

    pub fn len(&self) -> usize {
        match &self.keys {
            Keys::Packed64(s) => s.len(),
            Keys::Packed128(s) => s.len(),
            Keys::Wide(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Empties the set, keeping its allocation and current layout.
    pub fn clear(&mut self) {
        match &mut self.keys {
            Keys::Packed64(s) => s.clear(),
            Keys::Packed128(s) => s.clear(),
            Keys::Wide(s) => s.clear(),
        }
    }

    /// Name of the current key layout, for diagnostics.
    pub fn layout(&self) -> &'static str {
        match self.keys {
            Keys::Packed64(_) => "u64",
            Keys::Packed128(_) => "u128",
            Keys::Wide(_) => "point",
        }
    }

    /// All stored points, in unspecified order.
    pub fn points(&self) -> Vec<Point> {
        match &self.keys {
            Keys::Packed64(s) => s.iter().map(|&k| unpack(k as u128, self.dim, self.bits64)).collect(),
            Keys::Packed128(s) => s.iter().map(|&k| unpack(k, self.dim, self.bits128)).collect(),
            Keys::Wide(s) => s.iter().copied().collect(),
        }
    }

    fn widen(&mut self, p: &Point) {
        let pts = self.points();
        let fits128 = pts.iter().chain(std::iter::once(p)).all(|q| pack128(q, self.dim, self.bits128).is_some());
        self.keys = if fits128 && !matches!(self.keys, Keys::Packed128(_)) {
            Keys::Packed128(pts.iter().map(|q| pack128(q, self.dim, self.bits128).unwrap()).collect())
        } else {
            Keys::Wide(pts.into_iter().collect())
        };
    }
}

fn unpack(key: u128, dim: usize, bits: u32) -> Point {
    let mut c = [0i32; MAX_DIM];
    let mask = (1u128 << bits) - 1;
    for i in (0..dim).rev() {
        let shift = (dim - 1 - i) as u32 * bits;
        let raw = ((key >> shift) & mask) as i64;
        let v = if raw >= 1i64 << (bits - 1) { raw - (1i64 << bits) } else { raw };
        c[i] = v as i32;
    }
    Point(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_roundtrip_and_layouts() {
        let mut s = SiteSet::new(4);
        assert!(s.insert(Point::from_slice(&[1, -2, 3, -4])));
        assert!(!s.insert(Point::from_slice(&[1, -2, 3, -4])));
        assert_eq!(s.layout(), "u64");
        let big = Point::from_slice(&[40_000, 0, 0, -1]);
        assert!(s.insert(big));
        assert_eq!(s.layout(), "u128");
        assert!(s.contains(&Point::from_slice(&[1, -2, 3, -4])));
        assert!(s.contains(&big));
        assert!(s.insert(Point::from_slice(&[i32::MAX, i32::MIN, 0, 0])));
        assert_eq!(s.layout(), "u128");
        assert_eq!(s.len(), 3);

        let mut w = SiteSet::new(5);
        w.insert(Point::from_slice(&[1, 2, 3, 4, 5]));
        let huge = Point::from_slice(&[i32::MAX, i32::MIN, 0, 0, 0]);
        assert!(w.insert(huge));
        assert_eq!(w.layout(), "point");
        assert!(w.points().contains(&huge));
        assert!(w.contains(&Point::from_slice(&[1, 2, 3, 4, 5])));
    }

    #[test]
    fn boundary_coordinates_do_not_alias() {
        let mut s = SiteSet::new(5);
        // 12 bits per coordinate in d = 5
        assert!(s.insert(Point::from_slice(&[2047, 0, 0, 0, 0])));
        assert!(s.insert(Point::from_slice(&[-2048, 0, 0, 0, 0])));
        assert!(s.insert(Point::from_slice(&[2048, 0, 0, 0, 0])));
        assert!(s.insert(Point::from_slice(&[-2049, 0, 0, 0, 0])));
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn unpack_inverts_pack() {
        let p = Point::from_slice(&[-7, 0, 12, -1, 5]);
        let k = pack64(&p, 5, 12).unwrap();
        assert_eq!(unpack(k as u128, 5, 12), p);
    }
}
