//! Brute-force discretisation of `H(K) = H0(K) + V` on the momentum grid.
//!
//! The interaction kernel restricted to odd functions is
//! `(2π)^-2 Σ_s v(s) sin(s·p) sin(s·t)`, summed over all lattice vectors `s`
//! with `v(s) != 0`; the Nyström rule on the `n x n` grid turns it into a
//! matrix with weight `(2π/n)^2` per cell. Nothing here uses the determinant
//! basis or its closed forms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lanczos::{eigenvalues_outside, LanczosOptions, SymOperator};
use super::sector::{Parity, SectorBasis};
use crate::determinant::CouplingPair;
use crate::error::{Error, Result};
use crate::torus::{band_edges, dispersion, Band, GridSpec, Quasimomentum, Side};

/// The lattice vectors carrying the interaction, one of each `±s` pair.
pub const INTERACTION_SITES: [(i64, i64); 6] = [(1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (1, -1)];

/// Above this sector dimension the eigenvalues are found by Lanczos instead
/// of a dense solve.
pub const DENSE_LIMIT: usize = 2600;

/// `H(K)` on one reflection sector of the grid: a diagonal plus
/// `Σ_s c_s ψ_s ψ_s^T`.
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub parity: Parity,
    pub diagonal: Vec<f64>,
    /// One column per interaction site, already scaled by the square root of
    /// the quadrature weight.
    pub modes: Vec<Vec<f64>>,
    /// `2 v(s) / (2π)^2`: the factor two collects `s` and `-s`.
    pub strengths: Vec<f64>,
}

impl SymOperator for SectorOperator {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.diagonal) {
            *yi = di * xi;
        }
        for (psi, c) in self.modes.iter().zip(&self.strengths) {
            let proj: f64 = psi.iter().zip(x).map(|(a, b)| a * b).sum();
            let f = c * proj;
            for (yi, pi) in y.iter_mut().zip(psi) {
                *yi += f * pi;
            }
        }
    }
}

impl SectorOperator {
    pub fn dense(&self) -> faer::Mat<f64> {
        let n = self.dim();
        faer::Mat::<f64>::from_fn(n, n, |i, j| {
            let mut v = if i == j { self.diagonal[i] } else { 0.0 };
            for (psi, c) in self.modes.iter().zip(&self.strengths) {
                v += c * psi[i] * psi[j];
            }
            v
        })
    }
}

/// The fiber operator discretised on a momentum grid, split into its two
/// reflection sectors.
#[derive(Debug, Clone)]
pub struct MomentumGridOperator {
    pub grid: GridSpec,
    pub k: Quasimomentum,
    pub coupling: CouplingPair,
    pub band: Band,
    pub sectors: [SectorOperator; 2],
}

/// How to diagonalise the sector matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenMethod {
    /// Dense up to [`DENSE_LIMIT`], Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

fn sector_operator(
    coupling: CouplingPair,
    k: Quasimomentum,
    grid: GridSpec,
    parity: Parity,
) -> SectorOperator {
    let n = grid.n();
    let basis = SectorBasis::new(n, |j| grid.mirror(j), parity);
    let w = grid.cell_weight();
    let diagonal = (0..basis.dim())
        .map(|r| {
            let (i, j) = basis.rep(r);
            dispersion(k, grid.point(i), grid.point(j))
        })
        .collect();
    let mut modes = Vec::with_capacity(INTERACTION_SITES.len());
    let mut strengths = Vec::with_capacity(INTERACTION_SITES.len());
    for &(s1, s2) in &INTERACTION_SITES {
        let v = coupling.site_potential(s1, s2);
        let psi: Vec<f64> = basis
            .members
            .iter()
            .map(|orbit| {
                let sum: f64 = orbit
                    .iter()
                    .map(|&(p, amp)| {
                        let (i, j) = basis.coords(p);
                        amp * (s1 as f64 * grid.point(i) + s2 as f64 * grid.point(j)).sin()
                    })
                    .sum();
                w.sqrt() * sum
            })
            .collect();
        modes.push(psi);
        strengths.push(2.0 * v / (4.0 * PI * PI));
    }
    SectorOperator {
        parity,
        diagonal,
        modes,
        strengths,
    }
}

/// Assemble the discretised operator.
pub fn build_momentum_operator(
    coupling: CouplingPair,
    k: Quasimomentum,
    grid: GridSpec,
) -> Result<MomentumGridOperator> {
    let band = band_edges(k);
    if band.is_degenerate() {
        return Err(Error::DegenerateBand(band.width()));
    }
    Ok(MomentumGridOperator {
        grid,
        k,
        coupling,
        band,
        sectors: Parity::BOTH.map(|p| sector_operator(coupling, k, grid, p)),
    })
}

/// An eigenvalue of the discretised operator outside the band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleLevel {
    pub z: f64,
    pub side: Side,
    pub parity: Parity,
}

impl MomentumGridOperator {
    /// `5 * width / n`: the band eigenvalues of the grid operator crowd the
    /// edges, and this keeps them out of the count.
    pub fn default_margin(&self) -> f64 {
        5.0 * self.band.width() / self.grid.n() as f64
    }

    /// The whole operator on odd grid functions, one basis vector per pair
    /// `{q, -q}`. Only meant for structural checks on small grids.
    pub fn odd_space_matrix(&self) -> faer::Mat<f64> {
        let grid = self.grid;
        let n = grid.n();
        let mut points = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (mi, mj) = (grid.mirror(i), grid.mirror(j));
                if (mi, mj) == (i, j) {
                    continue;
                }
                if (i, j) < (mi, mj) {
                    points.push((grid.point(i), grid.point(j)));
                }
            }
        }
        let w = grid.cell_weight();
        let kernel = |p: (f64, f64), t: (f64, f64)| -> f64 {
            INTERACTION_SITES
                .iter()
                .map(|&(s1, s2)| {
                    let (a, b) = (s1 as f64, s2 as f64);
                    2.0 * self.coupling.site_potential(s1, s2) / (4.0 * PI * PI)
                        * (a * p.0 + b * p.1).sin()
                        * (a * t.0 + b * t.1).sin()
                })
                .sum()
        };
        let m = points.len();
        faer::Mat::<f64>::from_fn(m, m, |a, b| {
            let diag = if a == b {
                dispersion(self.k, points[a].0, points[a].1)
            } else {
                0.0
            };
            // (e_q - e_-q)/sqrt2 on both sides: four kernel terms, all equal
            diag + 2.0 * w * kernel(points[a], points[b])
        })
    }

    /// Every eigenvalue farther than `margin` from the band, ascending.
    pub fn discrete_eigenvalues(&self, margin: f64) -> Result<Vec<OracleLevel>> {
        self.discrete_eigenvalues_with(margin, EigenMethod::Auto)
    }

    pub fn discrete_eigenvalues_with(
        &self,
        margin: f64,
        method: EigenMethod,
    ) -> Result<Vec<OracleLevel>> {
        if margin.is_nan() || margin <= 0.0 {
            return Err(Error::InvalidMargin(margin));
        }
        let lo = self.band.e_min - margin;
        let hi = self.band.e_max + margin;
        let mut out = Vec::new();
        for sector in &self.sectors {
            let dense = match method {
                EigenMethod::Auto => sector.dim() <= DENSE_LIMIT,
                EigenMethod::Dense => true,
                EigenMethod::Lanczos => false,
            };
            let values: Vec<f64> = if dense {
                sector
                    .dense()
                    .self_adjoint_eigenvalues(faer::Side::Lower)
                    .map_err(|e| Error::Eigensolver(format!("{e:?}")))?
            } else {
                eigenvalues_outside(sector, lo, hi, &LanczosOptions::default(), false)?
                    .into_iter()
                    .map(|p| p.value)
                    .collect()
            };
            for z in values {
                let side = if z < lo {
                    Side::Below
                } else if z > hi {
                    Side::Above
                } else {
                    continue;
                };
                out.push(OracleLevel {
                    z,
                    side,
                    parity: sector.parity,
                });
            }
        }
        out.sort_by(|a, b| a.z.total_cmp(&b.z));
        Ok(out)
    }

    pub fn discrete_eigenvalues_default(&self) -> Result<Vec<OracleLevel>> {
        self.discrete_eigenvalues(self.default_margin())
    }
}
