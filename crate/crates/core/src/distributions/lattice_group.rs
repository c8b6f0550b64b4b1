//! Integer lattices generated by finite sets of vectors.

use serde::Serialize;

use crate::lattice::Point;

/// Hermite and Smith normal forms of the lattice generated by a set of vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeCertificate {
    pub dim: usize,
    /// Row-style Hermite normal form: `rank` basis rows, upper triangular, positive pivots.
    pub hermite: Vec<Vec<i64>>,
    /// Invariant factors d₁ | d₂ | … of the generated lattice (empty when rank < dim).
    pub smith: Vec<i64>,
    pub rank: usize,
}

impl LatticeCertificate {
    /// Index of the lattice in ℤ^d, or `None` when it has lower rank.
    pub fn index(&self) -> Option<u64> {
        (self.rank == self.dim).then(|| self.smith.iter().map(|&d| d.unsigned_abs()).product())
    }

    pub fn is_full(&self) -> bool {
        self.index() == Some(1)
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

fn hermite(rows: &[Vec<i128>], dim: usize) -> Vec<Vec<i128>> {
    let mut m: Vec<Vec<i128>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let mut basis = Vec::new();
    for col in 0..dim {
        let mut pivot: Option<Vec<i128>> = None;
        let mut rest = Vec::with_capacity(m.len());
        for row in m.drain(..) {
            if row[col] == 0 {
                rest.push(row);
                continue;
            }
            match pivot.take() {
                None => pivot = Some(row),
                Some(p) => {
                    let (g, x, y) = ext_gcd(p[col], row[col]);
                    let (a, b) = (p[col] / g, row[col] / g);
                    let new_p: Vec<i128> = (0..dim).map(|j| x * p[j] + y * row[j]).collect();
                    let killed: Vec<i128> = (0..dim).map(|j| b * p[j] - a * row[j]).collect();
                    pivot = Some(new_p);
                    if killed.iter().any(|&v| v != 0) {
                        rest.push(killed);
                    }
                }
            }
        }
        m = rest;
        if let Some(mut p) = pivot {
            if p[col] < 0 {
                p.iter_mut().for_each(|v| *v = -*v);
            }
            basis.push(p);
        }
    }
    // reduce entries above each pivot
    for i in 0..basis.len() {
        let col = basis[i].iter().position(|&v| v != 0).unwrap();
        let piv = basis[i][col];
        for k in 0..i {
            let q = basis[k][col].div_euclid(piv);
            if q != 0 {
                for j in 0..dim {
                    basis[k][j] -= q * basis[i][j];
                }
            }
        }
    }
    basis
}

fn smith_diagonal(mut a: Vec<Vec<i128>>) -> Vec<i128> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let m = a[0].len();
    let mut diag = Vec::new();
    for t in 0..n.min(m) {
        // bring the smallest nonzero entry of the trailing block to (t, t), then clear
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..m {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { return diag };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let q = a[i][t] / p;
                for j in t..m {
                    a[i][j] -= q * a[t][j];
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..m {
                let q = a[t][j] / p;
                for i in t..n {
                    a[i][j] -= q * a[i][t];
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility condition for the rest of the block
            let bad = (t + 1..n).flat_map(|i| (t + 1..m).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % p != 0);
            match bad {
                Some((i, _)) => {
                    for j in t..m {
                        a[t][j] += a[i][j];
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

/// Normal forms of the subgroup of ℤ^dim generated by `gens`.
pub fn lattice_certificate(dim: usize, gens: &[Point]) -> LatticeCertificate {
    let rows: Vec<Vec<i128>> = gens.iter().map(|p| p.coords(dim).iter().map(|&c| c as i128).collect()).collect();
    let h = hermite(&rows, dim);
    let rank = h.len();
    let smith = if rank == dim { smith_diagonal(h.clone()) } else { Vec::new() };
    LatticeCertificate {
        dim,
        hermite: h.iter().map(|r| r.iter().map(|&v| v as i64).collect()).collect(),
        smith: smith.into_iter().map(|v| v as i64).collect(),
        rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i32]]) -> Vec<Point> {
        v.iter().map(|c| Point::from_slice(c)).collect()
    }

    #[test]
    fn checkerboard_has_divisors_one_two() {
        let c = lattice_certificate(2, &pts(&[&[1, 1], &[1, -1], &[-1, -1], &[-1, 1]]));
        assert_eq!(c.smith, vec![1, 2]);
        assert_eq!(c.index(), Some(2));
        assert_eq!(c.hermite, vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn even_lattice_index_four() {
        let c = lattice_certificate(2, &pts(&[&[2, 0], &[0, 2], &[-2, 0], &[0, -2]]));
        assert_eq!(c.smith, vec![2, 2]);
        assert!(!c.is_full());
    }

    #[test]
    fn unit_vectors_generate_everything() {
        let gens: Vec<Point> = (0..4).flat_map(|i| [Point::unit(i), -Point::unit(i)]).collect();
        assert!(lattice_certificate(4, &gens).is_full());
    }

    #[test]
    fn lower_rank_detected() {
        let c = lattice_certificate(3, &pts(&[&[1, 0, 0], &[0, 1, 0]]));
        assert_eq!(c.rank, 2);
        assert_eq!(c.index(), None);
    }

    #[test]
    fn coprime_one_dimensional() {
        let c = lattice_certificate(1, &pts(&[&[6], &[10], &[15]]));
        assert!(c.is_full());
        let c = lattice_certificate(1, &pts(&[&[6], &[10]]));
        assert_eq!(c.index(), Some(2));
    }
}
