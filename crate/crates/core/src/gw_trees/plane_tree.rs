use std::fmt::Write as _;

use super::GwError;

/// A finite rooted ordered tree, stored as child counts in preorder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaneTree {
    children: Vec<u32>,
}

impl PlaneTree {
    /// The one-vertex tree.
    pub fn root_only() -> Self {
        PlaneTree { children: vec![0] }
    }

    /// Builds a tree from preorder child counts, checking that they code a tree.
    pub fn from_children(children: Vec<u32>) -> Result<Self, GwError> {
        let inc: Vec<i64> = children.iter().map(|&k| k as i64 - 1).collect();
        check_path(&inc)?;
        Ok(PlaneTree { children })
    }

    pub(crate) fn from_children_unchecked(children: Vec<u32>) -> Self {
        debug_assert!(check_path(&children.iter().map(|&k| k as i64 - 1).collect::<Vec<_>>()).is_ok());
        PlaneTree { children }
    }

    pub fn children(&self) -> &[u32] {
        &self.children
    }

    pub fn size(&self) -> usize {
        self.children.len()
    }

    /// Parent index of every vertex in preorder (the root maps to itself).
    pub fn parents(&self) -> Vec<usize> {
        let mut parents = vec![0; self.children.len()];
        let mut stack: Vec<(usize, u32)> = Vec::new();
        for (i, &k) in self.children.iter().enumerate() {
            while stack.last().is_some_and(|t| t.1 == 0) {
                stack.pop();
            }
            if let Some(top) = stack.last_mut() {
                parents[i] = top.0;
                top.1 -= 1;
            }
            if k > 0 {
                stack.push((i, k));
            }
        }
        parents
    }

    /// Generation of every vertex in preorder.
    pub fn depths(&self) -> Vec<u32> {
        let parents = self.parents();
        let mut d = vec![0; parents.len()];
        for i in 1..parents.len() {
            d[i] = d[parents[i]] + 1;
        }
        d
    }

    pub fn height(&self) -> u32 {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Contour (depth-first walk) heights: 2(size − 1) + 1 values starting and ending at 0.
    pub fn contour(&self) -> Vec<u32> {
        let depths = self.depths();
        let mut c = Vec::with_capacity(2 * self.size() - 1);
        c.push(0);
        for &dv in depths.iter().skip(1) {
            let last = *c.last().unwrap();
            for h in (dv - 1..last).rev() {
                c.push(h);
            }
            c.push(dv);
        }
        let last = *c.last().unwrap();
        for h in (0..last).rev() {
            c.push(h);
        }
        c
    }

    /// Increment text: one integer per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(3 * self.size());
        for &k in &self.children {
            let _ = writeln!(s, "{}", k as i64 - 1);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, GwError> {
        let inc = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.parse::<i64>().map_err(|e| GwError::InvalidPath(format!("{l:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        tree_from_lukasiewicz(&inc)
    }
}

fn check_path(inc: &[i64]) -> Result<(), GwError> {
    if inc.is_empty() {
        return Err(GwError::InvalidPath("empty path".into()));
    }
    let mut x = 0i64;
    for (l, &step) in inc.iter().enumerate() {
        if step < -1 {
            return Err(GwError::InvalidPath(format!("increment {step} at step {l}")));
        }
        x += step;
        if x < 0 && l + 1 < inc.len() {
            return Err(GwError::InvalidPath(format!("path reaches {x} at step {}", l + 1)));
        }
    }
    if x != -1 {
        return Err(GwError::InvalidPath(format!("path ends at {x}, expected -1")));
    }
    Ok(())
}

/// Tree coded by a Łukasiewicz path given through its increments k_u − 1.
pub fn tree_from_lukasiewicz(increments: &[i64]) -> Result<PlaneTree, GwError> {
    check_path(increments)?;
    Ok(PlaneTree { children: increments.iter().map(|&s| (s + 1) as u32).collect() })
}

/// Increments k_u − 1 of the Łukasiewicz path in preorder.
pub fn lukasiewicz(tree: &PlaneTree) -> Vec<i64> {
    tree.children.iter().map(|&k| k as i64 - 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert_eq!(lukasiewicz(&PlaneTree::root_only()), vec![-1]);
        let cherry = tree_from_lukasiewicz(&[1, -1, -1]).unwrap();
        assert_eq!(cherry.children(), &[2, 0, 0]);
        assert_eq!(cherry.parents(), vec![0, 0, 0]);
        assert_eq!(cherry.contour(), vec![0, 1, 0, 1, 0]);
        let path = tree_from_lukasiewicz(&[0, 0, -1]).unwrap();
        assert_eq!(path.depths(), vec![0, 1, 2]);
        assert_eq!(path.contour(), vec![0, 1, 2, 1, 0]);
    }

    #[test]
    fn invalid_paths() {
        assert!(tree_from_lukasiewicz(&[]).is_err());
        assert!(tree_from_lukasiewicz(&[-1, -1]).is_err());
        assert!(tree_from_lukasiewicz(&[1, -1]).is_err());
        assert!(tree_from_lukasiewicz(&[-2, 1]).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let t = tree_from_lukasiewicz(&[2, -1, 0, -1, -1]).unwrap();
        assert_eq!(PlaneTree::from_text(&t.to_text()).unwrap(), t);
        assert_eq!(t.to_text(), "2\n-1\n0\n-1\n-1\n");
    }
}
