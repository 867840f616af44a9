//! The fiber operator on odd functions of the relative coordinate, truncated
//! to the box `[-L, L]^2` with zero boundary values.
//!
//! `(H f)(s) = 4 f(s) - c1 [f(s+e1) + f(s-e1)] - c2 [f(s+e2) + f(s-e2)] + v(s) f(s)`
//! with `c_i = cos(K_i/2)`; its symbol is the pair dispersion `E_K`.

use serde::{Deserialize, Serialize};

use super::lanczos::{eigenvalues_outside, extreme_eigenvalues, LanczosOptions, SymOperator};
use super::sector::{Parity, SectorBasis};
use crate::determinant::CouplingPair;
use crate::error::{Error, Result};
use crate::torus::{band_edges, Band, Quasimomentum, Side};

/// Smallest box the oracle accepts.
pub const MIN_RADIUS: usize = 10;

/// One reflection sector of the box operator, stored as sparse rows.
#[derive(Debug, Clone)]
pub struct PositionSector {
    pub parity: Parity,
    rows: Vec<Vec<(usize, f64)>>,
    basis: SectorBasis,
    radius: usize,
}

impl SymOperator for PositionSector {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.rows) {
            *yi = row.iter().map(|&(j, a)| a * x[j]).sum();
        }
    }
}

impl PositionSector {
    fn new(coupling: CouplingPair, k: Quasimomentum, radius: usize, parity: Parity) -> Self {
        let m = 2 * radius + 1;
        let basis = SectorBasis::new(m, |a| m - 1 - a, parity);
        let (c1, c2) = k.half_cosines();
        let l = radius as i64;
        let mut rows = Vec::with_capacity(basis.dim());
        for orbit in &basis.members {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for &(p, amp) in orbit {
                let (a, b) = basis.coords(p);
                let (s1, s2) = (a as i64 - l, b as i64 - l);
                let mut add = |t1: i64, t2: i64, h: f64| {
                    if t1.abs() > l || t2.abs() > l {
                        return;
                    }
                    let q = (t1 + l) as usize * m + (t2 + l) as usize;
                    if let Some((col, amp_q)) = basis.lookup[q] {
                        let v = amp * h * amp_q;
                        match row.iter_mut().find(|e| e.0 == col) {
                            Some(e) => e.1 += v,
                            None => row.push((col, v)),
                        }
                    }
                };
                add(s1, s2, 4.0 + coupling.site_potential(s1, s2));
                add(s1 + 1, s2, -c1);
                add(s1 - 1, s2, -c1);
                add(s1, s2 + 1, -c2);
                add(s1, s2 - 1, -c2);
            }
            rows.push(row);
        }
        Self {
            parity,
            rows,
            basis,
            radius,
        }
    }

    /// The function on the box `[-L, L]^2` represented by sector coefficients.
    pub fn expand(&self, coeffs: &[f64]) -> Vec<Vec<f64>> {
        let m = 2 * self.radius + 1;
        let mut f = vec![vec![0.0; m]; m];
        for (orbit, &c) in self.basis.members.iter().zip(coeffs) {
            for &(p, amp) in orbit {
                let (a, b) = self.basis.coords(p);
                f[a][b] += c * amp;
            }
        }
        f
    }
}

/// The truncated operator, one entry per reflection sector.
#[derive(Debug, Clone)]
pub struct PositionBoxOperator {
    pub radius: usize,
    pub k: Quasimomentum,
    pub coupling: CouplingPair,
    pub band: Band,
    pub sectors: [PositionSector; 2],
}

/// A box eigenvalue together with its eigenfunction on the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxState {
    pub z: f64,
    pub side: Side,
    pub parity: Parity,
    /// `max |f|` on the outermost ring of the box over `max |f|` overall.
    pub boundary_ratio: f64,
}

pub fn build_position_operator(
    coupling: CouplingPair,
    k: Quasimomentum,
    radius: usize,
) -> Result<PositionBoxOperator> {
    if radius < MIN_RADIUS {
        return Err(Error::InvalidGrid(radius));
    }
    Ok(PositionBoxOperator {
        radius,
        k,
        coupling,
        band: band_edges(k),
        sectors: Parity::BOTH.map(|p| PositionSector::new(coupling, k, radius, p)),
    })
}

impl PositionBoxOperator {
    pub fn dim(&self) -> usize {
        self.sectors.iter().map(|s| s.dim()).sum()
    }

    /// Eigenvalues farther than `margin` outside the band, with the decay of
    /// their eigenfunctions, ascending.
    pub fn discrete_states(&self, margin: f64) -> Result<Vec<BoxState>> {
        let lo = self.band.e_min - margin;
        let hi = self.band.e_max + margin;
        let opts = LanczosOptions {
            max_steps: 1500,
            ..LanczosOptions::default()
        };
        let mut out = Vec::new();
        for sector in &self.sectors {
            for pair in eigenvalues_outside(sector, lo, hi, &opts, true)? {
                let f = sector.expand(pair.vector.as_deref().unwrap_or(&[]));
                let side = if pair.value < lo {
                    Side::Below
                } else {
                    Side::Above
                };
                out.push(BoxState {
                    z: pair.value,
                    side,
                    parity: sector.parity,
                    boundary_ratio: boundary_ratio(&f),
                });
            }
        }
        out.sort_by(|a, b| a.z.total_cmp(&b.z));
        Ok(out)
    }

    /// Smallest and largest eigenvalue of the truncated operator.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        let opts = LanczosOptions {
            max_steps: 4000,
            tol: 1e-9,
            ..LanczosOptions::default()
        };
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for sector in &self.sectors {
            let (a, b) = extreme_eigenvalues(sector, &opts)?;
            lo = lo.min(a);
            hi = hi.max(b);
        }
        Ok((lo, hi))
    }
}

fn boundary_ratio(f: &[Vec<f64>]) -> f64 {
    let m = f.len();
    let mut inner: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for (a, row) in f.iter().enumerate() {
        for (b, &v) in row.iter().enumerate() {
            inner = inner.max(v.abs());
            if a == 0 || b == 0 || a == m - 1 || b == m - 1 {
                edge = edge.max(v.abs());
            }
        }
    }
    if inner == 0.0 {
        0.0
    } else {
        edge / inner
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::find_roots_k0;

    #[test]
    fn free_box_spectrum_fills_the_band() {
        let o = build_position_operator(CouplingPair::FREE, Quasimomentum::ZERO, 40).unwrap();
        let (lo, hi) = o.extreme_eigenvalues().unwrap();
        let l2 = 1.0 / (40.0f64 * 40.0);
        assert!(lo > 0.0 && lo < 20.0 * l2, "{lo}");
        assert!(hi < 8.0 && hi > 8.0 - 20.0 * l2, "{hi}");
        assert!(o.discrete_states(1e-6).unwrap().is_empty());
    }

    #[test]
    fn box_is_symmetric() {
        let o = build_position_operator(
            CouplingPair {
                lambda: -7.0,
                mu: 3.0,
            },
            Quasimomentum::new(0.3, 2.0),
            10,
        )
        .unwrap();
        for s in &o.sectors {
            for (i, row) in s.rows.iter().enumerate() {
                for &(j, a) in row {
                    let back = s.rows[j].iter().find(|e| e.0 == i).map(|e| e.1);
                    assert_eq!(back, Some(a));
                }
            }
        }
        assert_eq!(o.dim(), 2 * 10 * 11);
        assert!(build_position_operator(CouplingPair::FREE, Quasimomentum::ZERO, 9).is_err());
    }

    #[test]
    fn deepest_state_matches_determinant_and_decays() {
        let c = CouplingPair {
            lambda: -30.0,
            mu: -20.0,
        };
        let o = build_position_operator(c, Quasimomentum::ZERO, 30).unwrap();
        let states = o.discrete_states(0.05).unwrap();
        assert_eq!(states.len(), 6);
        let z1 = find_roots_k0(c, Side::Below)[0];
        assert!((states[0].z - z1).abs() < 1e-8, "{} {z1}", states[0].z);
        assert!(states[0].boundary_ratio < 1e-6);
    }
}
