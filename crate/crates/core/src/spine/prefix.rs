use rand::Rng;

use super::SpineError;
use crate::distributions::{JumpDistribution, OffspringDistribution};
use crate::lattice::Point;

/// Vertex of a lazily grown Galton–Watson tree; children are drawn on first access.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub loc: Point,
    pub kids: Option<Vec<Node>>,
}

impl Node {
    fn leafless(loc: Point) -> Self {
        Node { loc, kids: None }
    }

    fn with_kids<R: Rng + ?Sized>(loc: Point, count: u32, theta: &JumpDistribution, rng: &mut R) -> Self {
        let kids = (0..count).map(|_| Node::leafless(loc + theta.sample(rng))).collect();
        Node { loc, kids: Some(kids) }
    }

    /// Children, drawing their number from μ the first time.
    pub fn expand<R: Rng + ?Sized>(&mut self, mu: &OffspringDistribution, theta: &JumpDistribution, rng: &mut R) -> &mut Vec<Node> {
        if self.kids.is_none() {
            let k = mu.sample(rng);
            *self = Node::with_kids(self.loc, k, theta, rng);
        }
        self.kids.as_mut().unwrap()
    }

    /// Number of vertices, stopping the exploration at `cap`.
    pub fn size_capped<R: Rng + ?Sized>(&mut self, cap: usize, mu: &OffspringDistribution, theta: &JumpDistribution, rng: &mut R) -> usize {
        let mut count = 0;
        self.visit(&mut |_| {
            count += 1;
            count < cap
        }, mu, theta, rng);
        count
    }

    /// Preorder traversal; `f` returns false to stop. Returns false if stopped.
    fn visit<R: Rng + ?Sized>(
        &mut self,
        f: &mut impl FnMut(Point) -> bool,
        mu: &OffspringDistribution,
        theta: &JumpDistribution,
        rng: &mut R,
    ) -> bool {
        if !f(self.loc) {
            return false;
        }
        self.visit_below(f, mu, theta, rng)
    }

    fn visit_below<R: Rng + ?Sized>(
        &mut self,
        f: &mut impl FnMut(Point) -> bool,
        mu: &OffspringDistribution,
        theta: &JumpDistribution,
        rng: &mut R,
    ) -> bool {
        let kids = self.expand(mu, theta, rng);
        for kid in kids.iter_mut() {
            if !kid.visit(f, mu, theta, rng) {
                return false;
            }
        }
        true
    }
}

/// Finite encoding (𝒯₀, 𝒯₋₁, …, 𝒯₋J) of the infinite tree with spatial locations.
///
/// Locations are stored in absolute coordinates; `origin` is subtracted on output so
/// that the root sits at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinePrefix {
    /// subtrees[j] hangs on spine vertex −j and is rooted at spine_locs[j].
    pub subtrees: Vec<Node>,
    pub spine_locs: Vec<Point>,
    pub origin: Point,
}

impl SpinePrefix {
    /// Sample with spine subtrees 𝒯₀ … 𝒯₋(len−1).
    pub fn sample<R: Rng + ?Sized>(len: usize, mu: &OffspringDistribution, theta: &JumpDistribution, rng: &mut R) -> Self {
        assert!(len >= 1);
        let mut p = SpinePrefix { subtrees: vec![Node::leafless(Point::ORIGIN)], spine_locs: vec![Point::ORIGIN], origin: Point::ORIGIN };
        p.extend(len - 1, theta, mu, rng);
        p
    }

    /// Appends `more` spine subtrees with root degree drawn from the tail law.
    pub fn extend<R: Rng + ?Sized>(&mut self, more: usize, theta: &JumpDistribution, mu: &OffspringDistribution, rng: &mut R) {
        for _ in 0..more {
            let loc = *self.spine_locs.last().unwrap() - theta.sample(rng);
            let k = mu.sample_tail(rng);
            self.spine_locs.push(loc);
            self.subtrees.push(Node::with_kids(loc, k, theta, rng));
        }
    }

    pub fn len(&self) -> usize {
        self.subtrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subtrees.is_empty()
    }

    /// k_∅(𝒯₋j).
    pub fn root_degree<R: Rng + ?Sized>(&mut self, j: usize, mu: &OffspringDistribution, theta: &JumpDistribution, rng: &mut R) -> usize {
        self.subtrees[j].expand(mu, theta, rng).len()
    }

    /// Applies τ*: re-roots at the first non-spine vertex and recentres the locations.
    pub fn shift_tau<R: Rng + ?Sized>(&mut self, mu: &OffspringDistribution, theta: &JumpDistribution, rng: &mut R) -> Result<SpinePrefix, SpineError> {
        self.subtrees[0].expand(mu, theta, rng);
        let k = self
            .subtrees
            .iter()
            .position(|t| t.kids.as_ref().is_some_and(|c| !c.is_empty()))
            .ok_or(SpineError::InsufficientPrefix)?;
        let mut rest = self.subtrees[k].clone();
        let v = rest.kids.as_mut().unwrap().remove(0);
        let origin = v.loc;
        let mut subtrees = vec![v, rest];
        subtrees.extend_from_slice(&self.subtrees[k + 1..]);
        let mut spine_locs = vec![origin];
        spine_locs.extend_from_slice(&self.spine_locs[k..]);
        Ok(SpinePrefix { subtrees, spine_locs, origin })
    }

    /// z_{u₀}, …, z_{u_{count−1}} relative to the root, extending the spine as needed.
    pub fn enumerate<R: Rng + ?Sized>(&mut self, count: usize, mu: &OffspringDistribution, theta: &JumpDistribution, rng: &mut R) -> Vec<Point> {
        let mut out = Vec::with_capacity(count);
        let origin = self.origin;
        let mut push = |z: Point| {
            out.push(z - origin);
            out.len() < count
        };
        if count == 0 || !push(self.subtrees[0].loc) {
            return out;
        }
        let mut j = 0;
        loop {
            if j == self.subtrees.len() {
                self.extend(1, theta, mu, rng);
            }
            if !self.subtrees[j].visit_below(&mut push, mu, theta, rng) {
                break;
            }
            j += 1;
        }
        out
    }

    /// Location of u₁ relative to the root and relative to its parent.
    pub fn first_vertex<R: Rng + ?Sized>(&mut self, mu: &OffspringDistribution, theta: &JumpDistribution, rng: &mut R) -> Option<(Point, Point)> {
        self.subtrees[0].expand(mu, theta, rng);
        self.subtrees.iter().find_map(|t| {
            let c = t.kids.as_ref()?.first()?;
            Some((c.loc - self.origin, c.loc - t.loc))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_geometric_critical, make_jump_srw};
    use crate::lattice::SiteSet;
    use crate::rng::stream;

    fn fixtures() -> (OffspringDistribution, JumpDistribution) {
        (make_geometric_critical(), make_jump_srw(3))
    }

    #[test]
    fn smallest_shift() {
        let (mu, theta) = fixtures();
        let mut rng = stream(0, 0);
        let e = Point::unit(0);
        let mut p = SpinePrefix {
            subtrees: vec![
                Node { loc: Point::ORIGIN, kids: Some(vec![Node { loc: e, kids: Some(vec![]) }]) },
                Node { loc: -e, kids: Some(vec![]) },
            ],
            spine_locs: vec![Point::ORIGIN, -e],
            origin: Point::ORIGIN,
        };
        let q = p.shift_tau(&mu, &theta, &mut rng).unwrap();
        assert_eq!(q.subtrees[0], Node { loc: e, kids: Some(vec![]) });
        assert_eq!(q.subtrees[1].kids.as_ref().unwrap().len(), 0);
        assert_eq!(q.spine_locs, vec![e, Point::ORIGIN, -e]);
        assert_eq!(q.origin, e);
    }

    #[test]
    fn all_trivial_prefix_is_rejected() {
        let (mu, theta) = fixtures();
        let mut rng = stream(0, 0);
        let mut p = SpinePrefix {
            subtrees: vec![Node { loc: Point::ORIGIN, kids: Some(vec![]) }],
            spine_locs: vec![Point::ORIGIN],
            origin: Point::ORIGIN,
        };
        assert_eq!(p.shift_tau(&mu, &theta, &mut rng), Err(SpineError::InsufficientPrefix));
    }

    fn range(points: &[Point], dim: usize) -> usize {
        let mut s = SiteSet::new(dim);
        points.iter().for_each(|&z| {
            s.insert(z);
        });
        s.len()
    }

    #[test]
    fn shift_continues_the_enumeration() {
        let (mu, theta) = fixtures();
        for seed in 0..200 {
            let mut rng = stream(seed, 0);
            let (n, m) = (1 + seed as usize % 17, 1 + seed as usize % 23);
            let mut p = SpinePrefix::sample(4, &mu, &theta, &mut rng);
            let full = p.enumerate(n + m, &mu, &theta, &mut rng);
            let mut q = p.clone();
            for _ in 0..n {
                q = q.shift_tau(&mu, &theta, &mut rng).unwrap();
            }
            let tail = q.enumerate(m, &mu, &theta, &mut rng);
            let expected: Vec<Point> = full[n..].iter().map(|&z| z - full[n]).collect();
            assert_eq!(tail, expected, "seed {seed}");
            assert!(range(&full, 3) <= range(&full[..n], 3) + range(&tail, 3));
        }
    }

    #[test]
    fn size_cap_stops_exploration() {
        let (mu, theta) = fixtures();
        let mut rng = stream(5, 0);
        let mut root = Node::leafless(Point::ORIGIN);
        let s = root.size_capped(10, &mu, &theta, &mut rng);
        assert!((1..=10).contains(&s));
    }
}
