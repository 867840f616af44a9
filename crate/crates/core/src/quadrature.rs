//! Resolvent integrals over the torus.
//!
//! Everything the determinant needs is a moment
//! `\int_{T^2} u(p) v(p) / (E_K(p) - z) dp` of two functions from the range of
//! the interaction. Two routes compute them:
//!
//! * [`resolvent_moment`] / [`resolvent_matrix`] integrate the orthonormal
//!   symmetric/antisymmetric basis directly on the full tensor grid;
//! * [`parity_moments`] uses that `E_K` is even in `p1` and in `p2` separately,
//!   splits the range into functions odd in `p1` and functions odd in `p2`, and
//!   folds the grid onto `[0, pi]^2`. This is the fast path used by the root
//!   finder; the two routes are checked against each other in the tests.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{band_edges, dispersion, periodic_integrate, GridSpec, Quasimomentum};

pub type Sym3 = [[f64; 3]; 3];

/// How finely to resolve a resolvent integral.
///
/// The grid is doubled from `start` until two successive results agree to
/// `tol` (relative to the size of the largest entry, floored at one), or the
/// grid reaches `max_n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePolicy {
    pub start: GridSpec,
    pub max_n: usize,
    pub tol: f64,
}

impl QuadraturePolicy {
    pub const DEFAULT_TOL: f64 = 1e-11;
    pub const MAX_POINTS: usize = 4096;

    pub fn adaptive(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    /// Always use exactly this grid.
    pub fn fixed(grid: GridSpec) -> Self {
        Self {
            start: grid,
            max_n: grid.n(),
            tol: Self::DEFAULT_TOL,
        }
    }

    pub fn starting_at(grid: GridSpec) -> Self {
        Self {
            start: grid,
            max_n: Self::MAX_POINTS.max(grid.n()),
            tol: Self::DEFAULT_TOL,
        }
    }

    pub fn with_max_n(self, max_n: usize) -> Self {
        Self { max_n, ..self }
    }
}

impl Default for QuadraturePolicy {
    fn default() -> Self {
        Self {
            start: GridSpec::new(64).expect("64 is a valid grid"),
            max_n: Self::MAX_POINTS,
            tol: Self::DEFAULT_TOL,
        }
    }
}

/// A value together with the grid that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined<T> {
    pub value: T,
    pub grid: GridSpec,
    /// Whether the doubling test passed before hitting `max_n`.
    pub converged: bool,
}

/// The orthonormal basis of the interaction range, ordered
/// `(os1, os2, os3, oa1, oa2, oa3)`.
///
/// The `os` functions are symmetric and the `oa` functions antisymmetric under
/// `p1 <-> p2`; all six are odd under `p -> -p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Os1,
    Os2,
    Os3,
    Oa1,
    Oa2,
    Oa3,
}

impl Basis {
    pub const ALL: [Basis; 6] = [
        Basis::Os1,
        Basis::Os2,
        Basis::Os3,
        Basis::Oa1,
        Basis::Oa2,
        Basis::Oa3,
    ];

    /// One-based index, matching the documented ordering.
    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i.wrapping_sub(1))
            .copied()
            .ok_or(Error::BasisIndex(i))
    }

    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn eval(self, p1: f64, p2: f64) -> f64 {
        let (s1, c1) = p1.sin_cos();
        let (s2, c2) = p2.sin_cos();
        match self {
            Basis::Os1 => (s1 + s2) / (2.0 * PI),
            Basis::Os2 => ((2.0 * p1).sin() + (2.0 * p2).sin()) / (2.0 * PI),
            Basis::Os3 => (s1 * c2 + s2 * c1) / (SQRT_2 * PI),
            Basis::Oa1 => (s1 - s2) / (2.0 * PI),
            Basis::Oa2 => ((2.0 * p1).sin() - (2.0 * p2).sin()) / (2.0 * PI),
            Basis::Oa3 => (s1 * c2 - s2 * c1) / (SQRT_2 * PI),
        }
    }
}

fn check_outside_band(k: Quasimomentum, z: f64) -> Result<()> {
    let band = band_edges(k);
    if band.is_degenerate() {
        return Err(Error::DegenerateBand(band.e_min));
    }
    band.check_outside(z).map(|_| ())
}

/// `\int_{T^2} alpha_i(p) alpha_j(p) / (E_K(p) - z) dp` for basis indices `1..=6`.
pub fn resolvent_moment(
    k: Quasimomentum,
    i: usize,
    j: usize,
    z: f64,
    grid: GridSpec,
) -> Result<f64> {
    let (bi, bj) = (Basis::from_index(i)?, Basis::from_index(j)?);
    check_outside_band(k, z)?;
    periodic_integrate(
        |p1, p2| bi.eval(p1, p2) * bj.eval(p1, p2) / (dispersion(k, p1, p2) - z),
        grid,
    )
}

/// All 36 moments of [`resolvent_moment`] from a single pass over the grid.
pub fn resolvent_matrix(k: Quasimomentum, z: f64, grid: GridSpec) -> Result<[[f64; 6]; 6]> {
    check_outside_band(k, z)?;
    let axis: Vec<f64> = grid.points().collect();
    let mut acc = [[0.0; 6]; 6];
    let mut alpha = [0.0; 6];
    for &p1 in &axis {
        for &p2 in &axis {
            let r = 1.0 / (dispersion(k, p1, p2) - z);
            for (a, b) in alpha.iter_mut().zip(Basis::ALL) {
                *a = b.eval(p1, p2);
            }
            for i in 0..6 {
                let ri = r * alpha[i];
                for j in i..6 {
                    acc[i][j] += ri * alpha[j];
                }
            }
        }
    }
    let w = grid.cell_weight();
    for i in 0..6 {
        for j in i..6 {
            acc[i][j] *= w;
            acc[j][i] = acc[i][j];
        }
        if acc[i].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                p1: f64::NAN,
                p2: f64::NAN,
            });
        }
    }
    Ok(acc)
}

/// Resolvent moments in the two reflection-parity blocks.
///
/// `odd_p1` uses the orthonormal functions
/// `sin p1 / (sqrt2 pi)`, `sin 2p1 / (sqrt2 pi)`, `sin p1 cos p2 / pi`;
/// `odd_p2` the same with `p1` and `p2` exchanged. Moments between the blocks
/// vanish identically for every `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityMoments {
    pub odd_p1: Sym3,
    pub odd_p2: Sym3,
}

impl ParityMoments {
    fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (x, y) in self.entries().zip(other.entries()) {
            d = d.max((x - y).abs());
        }
        d
    }

    fn max_abs(&self) -> f64 {
        self.entries().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.odd_p1
            .iter()
            .chain(self.odd_p2.iter())
            .flat_map(|row| row.iter().copied())
    }
}

/// Per-axis samples on the folded grid `p_j = j h`, `j = 0..=n/2`.
struct FoldedAxis {
    cos: Vec<f64>,
    sin: Vec<f64>,
    sin2: Vec<f64>,
    mult: Vec<f64>,
}

impl FoldedAxis {
    fn new(grid: GridSpec) -> Self {
        let half = grid.n() / 2;
        let h = grid.step();
        let mut axis = FoldedAxis {
            cos: Vec::with_capacity(half + 1),
            sin: Vec::with_capacity(half + 1),
            sin2: Vec::with_capacity(half + 1),
            mult: Vec::with_capacity(half + 1),
        };
        for j in 0..=half {
            let p = if j == half { PI } else { h * j as f64 };
            axis.cos.push(p.cos());
            // exact zeros keep the folded sums free of sin(pi) ~ 1e-16 noise
            axis.sin
                .push(if j == 0 || j == half { 0.0 } else { p.sin() });
            axis.sin2.push(if j == 0 || j == half {
                0.0
            } else {
                (2.0 * p).sin()
            });
            // p = 0 and p = pi are their own mirror images
            axis.mult.push(if j == 0 || j == half { 1.0 } else { 2.0 });
        }
        axis
    }
}

/// Fast evaluation of [`ParityMoments`] on one grid.
pub fn parity_moments(k: Quasimomentum, z: f64, grid: GridSpec) -> Result<ParityMoments> {
    check_outside_band(k, z)?;
    let (c1k, c2k) = k.half_cosines();
    let axis = FoldedAxis::new(grid);
    let m = axis.cos.len();

    // raw integrals of the odd_p1 block: products of (sin p1, sin 2p1) with
    // powers of cos p2
    let mut row_block = [0.0; 6];
    // column sums for the odd_p2 block: sum_j1 mult * R * cos(p1)^k
    let mut col = vec![[0.0f64; 3]; m];

    let shift2: Vec<f64> = axis.cos.iter().map(|c| 2.0 * c2k * c).collect();
    for j1 in 0..m {
        let a1 = 4.0 - 2.0 * c1k * axis.cos[j1] - z;
        let c1 = axis.cos[j1];
        let m1 = axis.mult[j1];
        let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
        for j2 in 0..m {
            let r = 1.0 / (a1 - shift2[j2]);
            let c2 = axis.cos[j2];
            let rm = axis.mult[j2] * r;
            r0 += rm;
            r1 += rm * c2;
            r2 += rm * c2 * c2;
            let cm = m1 * r;
            let cj = &mut col[j2];
            cj[0] += cm;
            cj[1] += cm * c1;
            cj[2] += cm * c1 * c1;
        }
        let (s, s2) = (axis.sin[j1], axis.sin2[j1]);
        row_block[0] += m1 * s * s * r0;
        row_block[1] += m1 * s * s2 * r0;
        row_block[2] += m1 * s2 * s2 * r0;
        row_block[3] += m1 * s * s * r1;
        row_block[4] += m1 * s * s2 * r1;
        row_block[5] += m1 * s * s * r2;
    }
    let mut col_block = [0.0; 6];
    for j2 in 0..m {
        let (s, s2, mm) = (axis.sin[j2], axis.sin2[j2], axis.mult[j2]);
        let cj = col[j2];
        col_block[0] += mm * s * s * cj[0];
        col_block[1] += mm * s * s2 * cj[0];
        col_block[2] += mm * s2 * s2 * cj[0];
        col_block[3] += mm * s * s * cj[1];
        col_block[4] += mm * s * s2 * cj[1];
        col_block[5] += mm * s * s * cj[2];
    }

    let w = grid.cell_weight();
    let normalize = |raw: [f64; 6]| -> Sym3 {
        let pi2 = PI * PI;
        let n11 = w * raw[0] / (2.0 * pi2);
        let n12 = w * raw[1] / (2.0 * pi2);
        let n22 = w * raw[2] / (2.0 * pi2);
        let n13 = w * raw[3] / (SQRT_2 * pi2);
        let n23 = w * raw[4] / (SQRT_2 * pi2);
        let n33 = w * raw[5] / pi2;
        [[n11, n12, n13], [n12, n22, n23], [n13, n23, n33]]
    };
    let out = ParityMoments {
        odd_p1: normalize(row_block),
        odd_p2: normalize(col_block),
    };
    if out.entries().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteSample {
            p1: f64::NAN,
            p2: f64::NAN,
        });
    }
    Ok(out)
}

/// [`parity_moments`] with grid doubling under `policy`.
pub fn parity_moments_adaptive(
    k: Quasimomentum,
    z: f64,
    policy: &QuadraturePolicy,
) -> Result<Refined<ParityMoments>> {
    let mut grid = policy.start;
    let mut value = parity_moments(k, z, grid)?;
    while grid.n() < policy.max_n {
        let finer = grid.refined();
        let next = parity_moments(k, z, finer)?;
        let diff = value.max_abs_diff(&next);
        let scale = next.max_abs().max(1.0);
        grid = finer;
        value = next;
        if diff <= policy.tol * scale {
            return Ok(Refined {
                value,
                grid,
                converged: true,
            });
        }
    }
    Ok(Refined {
        value,
        grid,
        converged: false,
    })
}

/// The six K = 0 threshold functions `a(z) .. f(z)`, with their conventional
/// prefactors `1/(8 pi^2)` (a, b, c), `sqrt2/(8 pi^2)` (d, e) and `1/(2 pi^2)` (f).
///
/// They do not depend on the symmetric/antisymmetric sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFunctions {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl ThresholdFunctions {
    /// Read the functions off the K = 0 parity moments.
    ///
    /// With the orthonormal basis, `M = [[2a, 2c, 2d], [2c, 2b, 2e], [2d, 2e, f]]`.
    pub fn from_moments(m: &Sym3) -> Self {
        Self {
            a: 0.5 * m[0][0],
            b: 0.5 * m[1][1],
            c: 0.5 * m[0][1],
            d: 0.5 * m[0][2],
            e: 0.5 * m[1][2],
            f: m[2][2],
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    pub const NAMES: [&'static str; 6] = ["a", "b", "c", "d", "e", "f"];

    /// Closed-form limits as `z` increases to the lower band edge 0.
    pub fn lower_edge_limits() -> Self {
        Self {
            a: (PI - 2.0) / (2.0 * PI),
            b: (30.0 * PI - 92.0) / (3.0 * PI),
            c: (2.0 * PI - 6.0) / PI,
            d: (4.0 - PI) / (2.0 * SQRT_2 * PI),
            e: (20.0 - 6.0 * PI) / (3.0 * SQRT_2 * PI),
            f: 4.0 / (3.0 * PI),
        }
    }

    /// Limits as `z` decreases to the upper band edge 8.
    ///
    /// The shift `p -> p + (pi, pi)` maps `E_0` to `8 - E_0`, flips `sin p_i`
    /// and `cos p_i` and keeps `sin 2p_i`; hence `a, b, e, f` change sign while
    /// `c` and `d` keep it.
    pub fn upper_edge_limits() -> Self {
        let l = Self::lower_edge_limits();
        Self {
            a: -l.a,
            b: -l.b,
            c: l.c,
            d: l.d,
            e: -l.e,
            f: -l.f,
        }
    }
}

fn check_k0_point(z: f64) -> Result<()> {
    band_edges(Quasimomentum::ZERO).check_outside(z).map(|_| ())
}

/// `a(z) .. f(z)` on one grid; `z` must lie outside `[0, 8]`.
pub fn threshold_functions(z: f64, grid: GridSpec) -> Result<ThresholdFunctions> {
    check_k0_point(z)?;
    let m = parity_moments(Quasimomentum::ZERO, z, grid)?;
    Ok(ThresholdFunctions::from_moments(&m.odd_p1))
}

/// `a(z) .. f(z)` with grid doubling.
pub fn threshold_functions_adaptive(
    z: f64,
    policy: &QuadraturePolicy,
) -> Result<Refined<ThresholdFunctions>> {
    check_k0_point(z)?;
    let r = parity_moments_adaptive(Quasimomentum::ZERO, z, policy)?;
    Ok(Refined {
        value: ThresholdFunctions::from_moments(&r.value.odd_p1),
        grid: r.grid,
        converged: r.converged,
    })
}

/// Threshold functions right next to a band edge, where the trapezoid rule
/// converges slowly: the largest grid is used and the result is accurate to
/// roughly `1e-5` at offsets of `1e-6`.
pub fn threshold_functions_near_edge(z: f64) -> Result<ThresholdFunctions> {
    let grid = GridSpec::new(QuadraturePolicy::MAX_POINTS)?;
    threshold_functions(z, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    #[test]
    fn basis_index_roundtrip() {
        for b in Basis::ALL {
            assert_eq!(Basis::from_index(b.index()).unwrap(), b);
        }
        assert!(Basis::from_index(0).is_err());
        assert!(Basis::from_index(7).is_err());
    }

    #[test]
    fn basis_is_orthonormal() {
        let grid = g(32);
        for bi in Basis::ALL {
            for bj in Basis::ALL {
                let v =
                    periodic_integrate(|p1, p2| bi.eval(p1, p2) * bj.eval(p1, p2), grid).unwrap();
                let want = if bi == bj { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-13, "{bi:?} {bj:?} {v}");
            }
        }
    }

    #[test]
    fn folded_and_full_grids_agree() {
        let grid = g(96);
        for &(k1, k2, z) in &[(0.0, 0.0, -0.7), (1.0, 0.5, -0.3), (-2.0, 2.5, 9.0)] {
            let k = Quasimomentum::new(k1, k2);
            let fast = parity_moments(k, z, grid).unwrap();
            let full = resolvent_matrix(k, z, grid).unwrap();
            // os_i = (odd_p1_i + odd_p2_i)/sqrt2, oa_i = (odd_p1_i - odd_p2_i)/sqrt2
            for i in 0..3 {
                for j in 0..3 {
                    let os = 0.5 * (fast.odd_p1[i][j] + fast.odd_p2[i][j]);
                    let oa = 0.5 * (fast.odd_p1[i][j] + fast.odd_p2[i][j]);
                    let mixed = 0.5 * (fast.odd_p1[i][j] - fast.odd_p2[i][j]);
                    assert!((full[i][j] - os).abs() < 1e-13);
                    assert!((full[i + 3][j + 3] - oa).abs() < 1e-13);
                    assert!((full[i][j + 3] - mixed).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn resolvent_moment_matches_matrix_and_is_symmetric() {
        let k = Quasimomentum::new(1.0, 1.0);
        let grid = g(48);
        let m = resolvent_matrix(k, -1.0, grid).unwrap();
        for i in 1..=6 {
            for j in 1..=6 {
                let v = resolvent_moment(k, i, j, -1.0, grid).unwrap();
                assert!((v - m[i - 1][j - 1]).abs() < 1e-14);
                assert_eq!(m[i - 1][j - 1], m[j - 1][i - 1]);
            }
        }
    }

    #[test]
    fn symmetric_and_antisymmetric_sectors_decouple_at_zero_k() {
        let m = resolvent_matrix(Quasimomentum::ZERO, -2.0, g(64)).unwrap();
        for i in 0..3 {
            for j in 3..6 {
                assert!(m[i][j].abs() < 1e-15);
            }
        }
        // and the sign label does not matter
        for i in 0..3 {
            for j in 0..3 {
                assert!((m[i][j] - m[i + 3][j + 3]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn os1_moment_is_twice_a() {
        let grid = g(128);
        for z in [-3.0, -0.2, 8.4, 20.0] {
            let a = threshold_functions(z, grid).unwrap().a;
            let m11 = resolvent_moment(Quasimomentum::ZERO, 1, 1, z, grid).unwrap();
            assert!((m11 - 2.0 * a).abs() < 1e-13, "{z}");
        }
    }

    #[test]
    fn rejects_energies_in_band() {
        assert!(threshold_functions(4.0, g(16)).is_err());
        assert!(threshold_functions(0.0, g(16)).is_err());
        let k = Quasimomentum::new(PI, 0.0);
        assert!(resolvent_moment(k, 1, 1, 3.0, g(16)).is_err());
        assert!(resolvent_moment(k, 1, 1, 1.9, g(16)).is_ok());
        let degenerate = Quasimomentum::new(PI, PI);
        assert!(matches!(
            parity_moments(degenerate, 0.0, g(16)),
            Err(Error::DegenerateBand(_))
        ));
    }

    #[test]
    fn far_field_decay() {
        let tf = threshold_functions(-1e3, g(32)).unwrap();
        assert!(tf.a > 0.0);
        for v in tf.as_array() {
            assert!(v.abs() < 2e-3, "{v}");
        }
    }

    #[test]
    fn adaptive_policy_stops_early_far_from_band() {
        let r = threshold_functions_adaptive(-5.0, &QuadraturePolicy::default()).unwrap();
        assert!(r.converged);
        assert!(r.grid.n() <= 256);
        let fixed = QuadraturePolicy::fixed(g(64));
        let r = threshold_functions_adaptive(-1e-3, &fixed).unwrap();
        assert_eq!(r.grid.n(), 64);
        assert!(!r.converged);
    }
}
