use rand::Rng;

use super::PlaneTree;
use crate::distributions::JumpDistribution;
use crate::lattice::{Point, SiteSet};

/// A plane tree with a lattice location for every vertex (preorder).
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialTree {
    pub tree: PlaneTree,
    pub locations: Vec<Point>,
    pub dim: usize,
}

impl SpatialTree {
    /// Same tree with every location shifted by `v`.
    pub fn translated(&self, v: Point) -> SpatialTree {
        SpatialTree { tree: self.tree.clone(), locations: self.locations.iter().map(|&z| z + v).collect(), dim: self.dim }
    }
}

/// Root at the origin, independent θ-increments along edges, in one preorder pass.
pub fn assign_locations<R: Rng + ?Sized>(tree: &PlaneTree, theta: &JumpDistribution, rng: &mut R) -> SpatialTree {
    let mut locations = Vec::with_capacity(tree.size());
    let mut stack: Vec<(u32, Point)> = Vec::new();
    for &k in tree.children() {
        while stack.last().is_some_and(|t| t.0 == 0) {
            stack.pop();
        }
        let z = match stack.last_mut() {
            None => Point::ORIGIN,
            Some(top) => {
                top.0 -= 1;
                top.1 + theta.sample(rng)
            }
        };
        locations.push(z);
        if k > 0 {
            stack.push((k, z));
        }
    }
    SpatialTree { tree: tree.clone(), locations, dim: theta.dim }
}

/// Number of distinct locations.
pub fn range_of(t: &SpatialTree) -> usize {
    let mut set = SiteSet::with_capacity(t.dim, t.locations.len());
    for &z in &t.locations {
        set.insert(z);
    }
    set.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::make_jump_srw;
    use crate::gw_trees::tree_from_lukasiewicz;
    use crate::rng::stream;

    fn dirac(x: &[i32]) -> JumpDistribution {
        JumpDistribution::unchecked_adaptedness(x.len(), vec![(Point::from_slice(x), 1.0)]).unwrap()
    }

    #[test]
    fn deterministic_path() {
        let path = tree_from_lukasiewicz(&[0, 0, -1]).unwrap();
        let t = assign_locations(&path, &dirac(&[1, 0, 0, 0]), &mut stream(0, 0));
        let want: Vec<Point> = (0..3).map(|i| Point::from_slice(&[i, 0, 0, 0])).collect();
        assert_eq!(t.locations, want);
        assert_eq!(range_of(&t), 3);
    }

    #[test]
    fn single_root() {
        let t = assign_locations(&PlaneTree::root_only(), &make_jump_srw(4), &mut stream(0, 0));
        assert_eq!(t.locations, vec![Point::ORIGIN]);
        assert_eq!(range_of(&t), 1);
    }

    #[test]
    fn back_and_forth_path_has_range_two() {
        let path = tree_from_lukasiewicz(&[0, 0, -1]).unwrap();
        let t = SpatialTree { tree: path, locations: vec![Point::ORIGIN, Point::unit(0), Point::ORIGIN], dim: 1 };
        assert_eq!(range_of(&t), 2);
    }

    #[test]
    fn edges_follow_support() {
        let theta = make_jump_srw(3);
        let mut rng = stream(9, 0);
        let tree = tree_from_lukasiewicz(&[2, 1, -1, -1, 0, -1, -1]).unwrap();
        let t = assign_locations(&tree, &theta, &mut rng);
        let parents = tree.parents();
        for i in 1..tree.size() {
            assert!(theta.prob(&(t.locations[i] - t.locations[parents[i]])) > 0.0);
        }
    }
}
