//! Reflection-parity sectors of odd functions on a square point set.
//!
//! Points are index pairs `(i, j)` on an `m x m` array with an involution
//! `mirror` acting on each axis. The reflections `R1: (i, j) -> (mirror i, j)`
//! and `R2: (i, j) -> (i, mirror j)` commute with every operator we build, so
//! odd functions split into the part odd in the first coordinate and even in
//! the second, and the part even in the first and odd in the second.

use serde::{Deserialize, Serialize};

/// Which reflection sector; both consist of functions odd under `x -> -x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// Odd in the first coordinate, even in the second.
    OddFirst,
    /// Even in the first coordinate, odd in the second.
    OddSecond,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::OddFirst, Parity::OddSecond];

    fn characters(self) -> (f64, f64) {
        match self {
            Parity::OddFirst => (-1.0, 1.0),
            Parity::OddSecond => (1.0, -1.0),
        }
    }
}

/// Orthonormal basis of one sector: one function per orbit of the reflection
/// group, carrying amplitude `±1/sqrt(|orbit|)` on each orbit point.
#[derive(Debug, Clone)]
pub(crate) struct SectorBasis {
    pub m: usize,
    /// `members[r]` lists `(point id, amplitude)` for basis function `r`;
    /// the first member is the orbit representative.
    pub members: Vec<Vec<(usize, f64)>>,
    /// For each point id, the basis function it belongs to and its amplitude.
    pub lookup: Vec<Option<(usize, f64)>>,
}

impl SectorBasis {
    pub fn new(m: usize, mirror: impl Fn(usize) -> usize, parity: Parity) -> Self {
        let (c1, c2) = parity.characters();
        let id = |i: usize, j: usize| i * m + j;
        let mut members = Vec::new();
        let mut lookup = vec![None; m * m];
        for i in 0..m {
            for j in 0..m {
                let images = [
                    (id(i, j), 1.0),
                    (id(mirror(i), j), c1),
                    (id(i, mirror(j)), c2),
                    (id(mirror(i), mirror(j)), c1 * c2),
                ];
                let here = id(i, j);
                if images.iter().any(|&(p, _)| p < here) {
                    continue;
                }
                // a reflection that fixes the point with character -1 forces f = 0 there
                if images.iter().any(|&(p, c)| p == here && c < 0.0) {
                    continue;
                }
                let mut orbit: Vec<(usize, f64)> = Vec::with_capacity(4);
                for (p, c) in images {
                    if !orbit.iter().any(|&(q, _)| q == p) {
                        orbit.push((p, c));
                    }
                }
                let norm = 1.0 / (orbit.len() as f64).sqrt();
                let r = members.len();
                for o in orbit.iter_mut() {
                    o.1 *= norm;
                    lookup[o.0] = Some((r, o.1));
                }
                members.push(orbit);
            }
        }
        Self { m, members, lookup }
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn coords(&self, point: usize) -> (usize, usize) {
        (point / self.m, point % self.m)
    }

    /// Representative point of basis function `r`.
    pub fn rep(&self, r: usize) -> (usize, usize) {
        self.coords(self.members[r][0].0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_dimensions_on_even_grid() {
        // n-point periodic grid: (n/2 - 1)(n/2 + 1) functions per sector
        for n in [8usize, 16, 64] {
            for p in Parity::BOTH {
                let b = SectorBasis::new(n, |j| (n - j) % n, p);
                assert_eq!(b.dim(), (n / 2 - 1) * (n / 2 + 1));
            }
        }
    }

    #[test]
    fn sector_dimensions_on_box() {
        // box [-L, L]: L choices for the odd coordinate, L + 1 for the even one
        let l = 5usize;
        let m = 2 * l + 1;
        let b = SectorBasis::new(m, |a| m - 1 - a, Parity::OddFirst);
        assert_eq!(b.dim(), l * (l + 1));
        // two sectors together span all odd functions, ((2L+1)^2 - 1) / 2
        assert_eq!(2 * b.dim(), (m * m - 1) / 2);
    }

    #[test]
    fn basis_is_orthonormal() {
        let n = 12;
        let b = SectorBasis::new(n, |j| (n - j) % n, Parity::OddSecond);
        let mut seen = vec![0usize; n * n];
        for orbit in &b.members {
            let norm: f64 = orbit.iter().map(|(_, a)| a * a).sum();
            assert!((norm - 1.0).abs() < 1e-15);
            for &(p, _) in orbit {
                seen[p] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c <= 1));
    }
}
