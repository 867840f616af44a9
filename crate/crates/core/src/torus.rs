//! The two-torus of quasimomenta, the pair dispersion and its band, and the
//! uniform trapezoid rule for periodic integrands.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Wrap an angle into `[-pi, pi)`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x - TWO_PI * ((x + PI) / TWO_PI).floor();
    // floor can leave y == pi (or a hair below -pi) after rounding
    if y >= PI {
        y -= TWO_PI;
    }
    if y < -PI {
        y = -PI;
    }
    y
}

/// Total pair quasimomentum `K = (K1, K2)`, always stored in `[-pi, pi)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quasimomentum {
    pub k1: f64,
    pub k2: f64,
}

impl Quasimomentum {
    pub const ZERO: Quasimomentum = Quasimomentum { k1: 0.0, k2: 0.0 };

    pub fn new(k1: f64, k2: f64) -> Self {
        Self {
            k1: wrap_angle(k1),
            k2: wrap_angle(k2),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.k1 == 0.0 && self.k2 == 0.0
    }

    /// `(cos(K1/2), cos(K2/2))`, the hopping amplitudes of the relative motion.
    pub fn half_cosines(&self) -> (f64, f64) {
        ((0.5 * self.k1).cos(), (0.5 * self.k2).cos())
    }

    /// The quasimomentum with its components exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            k1: self.k2,
            k2: self.k1,
        }
    }
}

impl Default for Quasimomentum {
    fn default() -> Self {
        Self::ZERO
    }
}

/// Which side of the band an energy sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Below, Side::Above];
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Below => f.write_str("below"),
            Side::Above => f.write_str("above"),
        }
    }
}

/// The closed interval `[E_min(K), E_max(K)]`, which is the essential spectrum
/// of every fiber operator at that `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub e_min: f64,
    pub e_max: f64,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.e_max - self.e_min
    }

    pub fn is_degenerate(&self) -> bool {
        self.width() <= 1e-12
    }

    pub fn edge(&self, side: Side) -> f64 {
        match side {
            Side::Below => self.e_min,
            Side::Above => self.e_max,
        }
    }

    /// `None` for energies inside the closed band.
    pub fn side_of(&self, z: f64) -> Option<Side> {
        if z < self.e_min {
            Some(Side::Below)
        } else if z > self.e_max {
            Some(Side::Above)
        } else {
            None
        }
    }

    /// Distance to the band; zero inside it.
    pub fn distance(&self, z: f64) -> f64 {
        (self.e_min - z).max(z - self.e_max).max(0.0)
    }

    /// The energy at `distance` from the edge on `side`.
    pub fn offset(&self, side: Side, distance: f64) -> f64 {
        match side {
            Side::Below => self.e_min - distance,
            Side::Above => self.e_max + distance,
        }
    }

    /// Reject energies that touch the band.
    pub fn check_outside(&self, z: f64) -> Result<Side> {
        match self.side_of(z) {
            Some(side) if z.is_finite() => Ok(side),
            _ => Err(Error::InsideBand { z, band: *self }),
        }
    }
}

/// `E_K(p) = 2 [(1 - cos(K1/2) cos p1) + (1 - cos(K2/2) cos p2)]`.
pub fn dispersion(k: Quasimomentum, p1: f64, p2: f64) -> f64 {
    let (c1, c2) = k.half_cosines();
    2.0 * ((1.0 - c1 * p1.cos()) + (1.0 - c2 * p2.cos()))
}

pub fn band_edges(k: Quasimomentum) -> Band {
    let (c1, c2) = k.half_cosines();
    // cos(K_i/2) >= 0 on [-pi, pi), so the extrema sit at p = 0 and p = (pi, pi)
    Band {
        e_min: 2.0 * ((1.0 - c1) + (1.0 - c2)),
        e_max: 2.0 * ((1.0 + c1) + (1.0 + c2)),
    }
}

/// A uniform tensor grid with `n` points per axis, `p_j = -pi + 2 pi j / n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    /// Quadrature weight of one grid cell, `(2 pi / n)^2`.
    pub fn cell_weight(&self) -> f64 {
        self.step() * self.step()
    }

    pub fn point(&self, j: usize) -> f64 {
        -PI + self.step() * j as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.point(j))
    }

    /// The grid with twice as many points per axis.
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n }
    }

    /// Index of `-p_j` on the grid.
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }
}

/// Uniform tensor trapezoid approximation of `\int_{T^2} f(p) dp`.
///
/// Any non-finite sample is reported as an error; in practice that means the
/// integrand has a pole on the torus, e.g. a resolvent evaluated inside the band.
pub fn periodic_integrate<F>(f: F, grid: GridSpec) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let axis: Vec<f64> = grid.points().collect();
    let mut sum = 0.0;
    for &p1 in &axis {
        let mut row = 0.0;
        for &p2 in &axis {
            let v = f(p1, p2);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { p1, p2 });
            }
            row += v;
        }
        sum += row;
    }
    Ok(sum * grid.cell_weight())
}

/// One-dimensional counterpart of [`periodic_integrate`] over `[-pi, pi)`.
pub fn periodic_integrate_1d<F>(f: F, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if n < 2 {
        return Err(Error::InvalidGrid(n));
    }
    let h = TWO_PI / n as f64;
    let mut sum = 0.0;
    for j in 0..n {
        let p = -PI + h * j as f64;
        let v = f(p);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample { p1: p, p2: 0.0 });
        }
        sum += v;
    }
    Ok(sum * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_reference_values() {
        assert_eq!(dispersion(Quasimomentum::ZERO, 0.0, 0.0), 0.0);
        assert!((dispersion(Quasimomentum::ZERO, PI, PI) - 8.0).abs() < 1e-15);
        let k = Quasimomentum::new(PI, PI);
        for &(p1, p2) in &[(0.0, 0.0), (1.0, -2.0), (PI, 0.3)] {
            assert!((dispersion(k, p1, p2) - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn band_edges_reference_values() {
        let b = band_edges(Quasimomentum::ZERO);
        assert_eq!((b.e_min, b.e_max), (0.0, 8.0));

        // (pi, pi) wraps to (-pi, -pi); cos(-pi/2) is zero up to rounding
        let b = band_edges(Quasimomentum::new(PI, PI));
        assert!((b.e_min - 4.0).abs() < 1e-12 && (b.e_max - 4.0).abs() < 1e-12);
        assert!(b.is_degenerate());

        let b = band_edges(Quasimomentum::new(PI, 0.0));
        assert!((b.e_min - 2.0).abs() < 1e-12);
        assert!((b.e_max - 6.0).abs() < 1e-12);
    }

    #[test]
    fn band_edges_are_dispersion_extrema() {
        let grid = GridSpec::new(64).unwrap();
        for &(k1, k2) in &[(0.3, -1.2), (2.9, 0.0), (-3.0, 3.0)] {
            let k = Quasimomentum::new(k1, k2);
            let b = band_edges(k);
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for p1 in grid.points() {
                for p2 in grid.points() {
                    let e = dispersion(k, p1, p2);
                    lo = lo.min(e);
                    hi = hi.max(e);
                }
            }
            // both extrema are attained on an even grid (p = 0 and p = -pi)
            assert!((lo - b.e_min).abs() < 1e-12);
            assert!((hi - b.e_max).abs() < 1e-12);
            assert!(b.e_min >= 0.0 && b.e_max <= 8.0 && b.e_min <= b.e_max);
        }
    }

    #[test]
    fn quasimomentum_wraps_into_fundamental_domain() {
        let k = Quasimomentum::new(PI, 3.0 * PI + 0.5);
        assert!((k.k1 + PI).abs() < 1e-15);
        assert!((k.k2 - (-PI + 0.5)).abs() < 1e-12);
        for x in [-7.0, -PI, -1e-17, 0.0, 6.283185307179586, 1e6] {
            let y = wrap_angle(x);
            assert!((-PI..PI).contains(&y), "{x} -> {y}");
        }
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(6).is_err());
        assert!(GridSpec::new(9).is_err());
        let g = GridSpec::new(8).unwrap();
        assert_eq!(g.mirror(0), 0);
        assert_eq!(g.mirror(4), 4);
        assert_eq!(g.mirror(1), 7);
        assert!((g.point(g.mirror(3)) + g.point(3)).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_elementary_integrals() {
        for n in [8, 16, 64] {
            let g = GridSpec::new(n).unwrap();
            let one = periodic_integrate(|_, _| 1.0, g).unwrap();
            assert!((one - 4.0 * PI * PI).abs() < 1e-12);
            let cos = periodic_integrate(|p1, _| p1.cos(), g).unwrap();
            assert!(cos.abs() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_flags_poles() {
        let g = GridSpec::new(8).unwrap();
        let err = periodic_integrate(|p1, p2| 1.0 / dispersion(Quasimomentum::ZERO, p1, p2), g);
        assert!(matches!(err, Err(Error::NonFiniteSample { .. })));
    }

    #[test]
    fn band_side_classification() {
        let b = band_edges(Quasimomentum::ZERO);
        assert_eq!(b.side_of(-0.1), Some(Side::Below));
        assert_eq!(b.side_of(8.5), Some(Side::Above));
        assert_eq!(b.side_of(0.0), None);
        assert!(b.check_outside(4.0).is_err());
        assert!(b.check_outside(f64::NAN).is_err());
        assert!((b.distance(-2.0) - 2.0).abs() < 1e-15);
        assert_eq!(b.offset(Side::Above, 1.5), 9.5);
    }
}
