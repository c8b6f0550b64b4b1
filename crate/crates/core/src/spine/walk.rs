use rand::Rng;

use crate::distributions::{JumpDistribution, OffspringDistribution};
use crate::lattice::Point;

/// Locations z_{u₀}, z_{u₁}, … of the tree-indexed walk on the infinite tree, in
/// lexicographical order of the non-spine vertices.
///
/// Subtrees are grown depth first as they are visited, so memory is the current
/// stack of open vertices.
pub struct SpineWalk<'a, R: Rng + ?Sized> {
    mu: &'a OffspringDistribution,
    theta: &'a JumpDistribution,
    rng: &'a mut R,
    /// (location, children still to visit)
    stack: Vec<(Point, u32)>,
    spine_loc: Point,
    spine_index: u64,
    emitted: u64,
}

impl<'a, R: Rng + ?Sized> SpineWalk<'a, R> {
    pub fn new(mu: &'a OffspringDistribution, theta: &'a JumpDistribution, rng: &'a mut R) -> Self {
        SpineWalk { mu, theta, rng, stack: Vec::new(), spine_loc: Point::ORIGIN, spine_index: 0, emitted: 0 }
    }

    /// Index j of the spine vertex −j whose subtree is being visited.
    pub fn spine_index(&self) -> u64 {
        self.spine_index
    }

    pub fn spine_location(&self) -> Point {
        self.spine_loc
    }
}

impl<R: Rng + ?Sized> Iterator for SpineWalk<'_, R> {
    type Item = (u64, Point);

    #[inline]
    fn next(&mut self) -> Option<(u64, Point)> {
        if self.emitted == 0 {
            self.emitted = 1;
            let k = self.mu.sample(self.rng);
            self.stack.push((Point::ORIGIN, k));
            return Some((0, Point::ORIGIN));
        }
        loop {
            match self.stack.last_mut() {
                Some(top) if top.1 > 0 => {
                    top.1 -= 1;
                    let z = top.0 + self.theta.sample(self.rng);
                    let k = self.mu.sample(self.rng);
                    self.stack.push((z, k));
                    let i = self.emitted;
                    self.emitted += 1;
                    return Some((i, z));
                }
                Some(_) => {
                    self.stack.pop();
                }
                None => {
                    // edge −(j+1) → −j carries a θ-step
                    self.spine_loc -= self.theta.sample(self.rng);
                    self.spine_index += 1;
                    let k = self.mu.sample_tail(self.rng);
                    self.stack.push((self.spine_loc, k));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_geometric_critical, make_jump_srw};
    use crate::rng::stream;

    #[test]
    fn starts_at_root() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        for s in 0..20 {
            let mut rng = stream(s, 0);
            let mut w = SpineWalk::new(&mu, &theta, &mut rng);
            assert_eq!(w.next(), Some((0, Point::ORIGIN)));
            let (i, z) = w.next().unwrap();
            assert_eq!(i, 1);
            assert!(!z.is_origin());
        }
    }

    #[test]
    fn indices_are_consecutive() {
        let mu = make_geometric_critical();
        let theta = make_jump_srw(5);
        let mut rng = stream(1, 0);
        for (expected, (i, _)) in SpineWalk::new(&mu, &theta, &mut rng).take(10_000).enumerate() {
            assert_eq!(i, expected as u64);
        }
    }
}
