//! The Fredholm determinant of the fiber operator and the constants that
//! govern its behaviour at the band edges.
//!
//! # The model
//!
//! Relative motion of the pair lives on odd functions of `s in Z^2`. The
//! interaction is a multiplication by
//!
//! | `s`                      | amplitude |
//! |--------------------------|-----------|
//! | `(±1, 0)`, `(0, ±1)`     | `λ/2`     |
//! | `(±2, 0)`, `(0, ±2)`     | `μ/2`     |
//! | `(±1, ±1)`               | `μ`       |
//!
//! Restricted to odd functions it has rank six; in the orthonormal
//! [`Basis`](crate::quadrature::Basis) it reads `V = Σ g_i (·, α_i) α_i` with
//! `g = (λ/2, μ/2, μ)` in each of the symmetric and antisymmetric sectors.
//! With `M_ij(z) = (R_0(z) α_j, α_i)` the determinant of `I + G M(z)` vanishes
//! exactly at the discrete eigenvalues.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{
    parity_moments, resolvent_matrix, threshold_functions, ParityMoments, Sym3, ThresholdFunctions,
};
use crate::torus::{GridSpec, Quasimomentum, Side};

/// The interaction strengths `(λ, μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPair {
    pub lambda: f64,
    pub mu: f64,
}

impl CouplingPair {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite()) {
            return Err(Error::NonFiniteCoupling { lambda, mu });
        }
        Ok(Self { lambda, mu })
    }

    pub const FREE: CouplingPair = CouplingPair {
        lambda: 0.0,
        mu: 0.0,
    };

    /// Amplitude of the interaction at relative position `s`.
    pub fn site_potential(&self, s1: i64, s2: i64) -> f64 {
        match (s1.abs(), s2.abs()) {
            (1, 0) | (0, 1) => 0.5 * self.lambda,
            (2, 0) | (0, 2) => 0.5 * self.mu,
            (1, 1) => self.mu,
            _ => 0.0,
        }
    }

    /// `g = (λ/2, μ/2, μ)`: the eigenvalues of the interaction on each sector.
    pub fn channel_strengths(&self) -> [f64; 3] {
        [0.5 * self.lambda, 0.5 * self.mu, self.mu]
    }

    /// Operator norm of the interaction. No eigenvalue lies farther than this
    /// from the band.
    pub fn interaction_norm(&self) -> f64 {
        self.channel_strengths()
            .iter()
            .fold(0.0f64, |m, g| m.max(g.abs()))
    }

    /// `(-λ, -μ)`, which exchanges the roles of the two band edges.
    pub fn reflected(&self) -> Self {
        Self {
            lambda: -self.lambda,
            mu: -self.mu,
        }
    }
}

/// `μ0^±` and `μ1^±`: the roots of the `λ`-free and `λ`-linear parts of the
/// edge limit of the determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConstants {
    pub mu0_minus: f64,
    pub mu0_plus: f64,
    pub mu1_minus: f64,
    pub mu1_plus: f64,
}

/// Evaluate `μ0^±` and `μ1^±` from their closed forms.
pub fn constants() -> ThresholdConstants {
    let pi2 = PI * PI;
    let d0 = (1044.0 * pi2 - 6720.0 * PI + 10816.0).sqrt();
    let den0 = 240.0 * PI - 24.0 * pi2 - 512.0;
    let d1 = (225.0 * pi2 * pi2 - 1440.0 * pi2 * PI + 3904.0 * pi2 - 10240.0 * PI + 16384.0).sqrt();
    let den1 = 120.0 * PI - 12.0 * pi2 - 256.0;
    ThresholdConstants {
        mu0_minus: (88.0 - 30.0 * PI - d0) / den0 * PI,
        mu0_plus: (88.0 - 30.0 * PI + d0) / den0 * PI,
        mu1_minus: (128.0 - 16.0 * PI - 9.0 * pi2 - d1) / den1,
        mu1_plus: (128.0 - 16.0 * PI - 9.0 * pi2 + d1) / den1,
    }
}

/// The common prefactor `(30π - 3π² - 64) / (6π²)` of `C^±`.
pub fn asymptote_prefactor() -> f64 {
    (30.0 * PI - 3.0 * PI * PI - 64.0) / (6.0 * PI * PI)
}

/// Limit of the determinant at the band edge on `side`: `C^-` below, `C^+` above.
pub fn c_constant(side: Side, coupling: CouplingPair) -> f64 {
    let k = constants();
    let CouplingPair { lambda, mu } = coupling;
    let pre = asymptote_prefactor();
    match side {
        Side::Below => {
            pre * (8.0 * (mu - k.mu0_plus) * (mu - k.mu0_minus)
                + lambda * (mu - k.mu1_plus) * (mu - k.mu1_minus))
        }
        Side::Above => {
            pre * (8.0 * (mu + k.mu0_plus) * (mu + k.mu0_minus)
                - lambda * (mu + k.mu1_plus) * (mu + k.mu1_minus))
        }
    }
}

/// The factorised form of the K = 0 determinant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterminantBreakdown {
    /// `1 + λ a`
    pub delta_lambda0: f64,
    /// `(1 + μ b)(1 + μ f) - 2 μ² e²`
    pub delta_0mu: f64,
    /// The coupling term between the two.
    pub delta_12: f64,
    pub total: f64,
}

impl DeterminantBreakdown {
    pub fn from_functions(coupling: CouplingPair, t: &ThresholdFunctions) -> Self {
        let CouplingPair { lambda, mu } = coupling;
        let ThresholdFunctions { a, b, c, d, e, f } = *t;
        let delta_lambda0 = 1.0 + lambda * a;
        let delta_0mu = (1.0 + mu * b) * (1.0 + mu * f) - 2.0 * mu * mu * e * e;
        let delta_12 = 4.0 * lambda * mu * mu * c * d * e
            - lambda * mu * c * c * (1.0 + mu * f)
            - 2.0 * lambda * mu * d * d * (1.0 + mu * b);
        Self {
            delta_lambda0,
            delta_0mu,
            delta_12,
            total: delta_lambda0 * delta_0mu + delta_12,
        }
    }
}

/// The 3x3 system whose determinant is `Δ_{λμ}(z)`, i.e. `I + G M(z)` with
/// `G = diag(λ/2, μ/2, μ)`.
pub fn system_matrix(coupling: CouplingPair, t: &ThresholdFunctions) -> Sym3 {
    let CouplingPair { lambda: l, mu: m } = coupling;
    let ThresholdFunctions { a, b, c, d, e, f } = *t;
    [
        [1.0 + l * a, l * c, l * d],
        [m * c, 1.0 + m * b, m * e],
        [2.0 * m * d, 2.0 * m * e, 1.0 + m * f],
    ]
}

pub(crate) fn det3(m: &Sym3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// `Δ_{λμ}(z)` at `K = 0` on a fixed grid.
pub fn delta(coupling: CouplingPair, z: f64, grid: GridSpec) -> Result<DeterminantBreakdown> {
    let t = threshold_functions(z, grid)?;
    Ok(DeterminantBreakdown::from_functions(coupling, &t))
}

/// `det(I + G N)` for one 3x3 parity block of moments.
pub fn block_determinant(coupling: CouplingPair, moments: &Sym3) -> f64 {
    let g = coupling.channel_strengths();
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = f64::from(u8::from(i == j)) + g[i] * moments[i][j];
        }
    }
    det3(&m)
}

/// Determinants of the two reflection-parity blocks; their product is
/// [`delta_general_k`].
pub fn parity_determinants(coupling: CouplingPair, moments: &ParityMoments) -> [f64; 2] {
    [
        block_determinant(coupling, &moments.odd_p1),
        block_determinant(coupling, &moments.odd_p2),
    ]
}

/// The full 6x6 determinant `det(I + G A(K, z))` in the symmetric /
/// antisymmetric basis, for any `K` with a non-degenerate band.
pub fn delta_general_k(
    coupling: CouplingPair,
    k: Quasimomentum,
    z: f64,
    grid: GridSpec,
) -> Result<f64> {
    let a = resolvent_matrix(k, z, grid)?;
    let g = coupling.channel_strengths();
    let strengths = [g[0], g[1], g[2], g[0], g[1], g[2]];
    let m = faer::Mat::<f64>::from_fn(6, 6, |i, j| {
        f64::from(u8::from(i == j)) + strengths[i] * a[i][j]
    });
    Ok(m.determinant())
}

/// [`parity_determinants`] evaluated on one grid.
pub fn parity_determinants_at(
    coupling: CouplingPair,
    k: Quasimomentum,
    z: f64,
    grid: GridSpec,
) -> Result<[f64; 2]> {
    Ok(parity_determinants(coupling, &parity_moments(k, z, grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> GridSpec {
        GridSpec::new(n).unwrap()
    }

    #[test]
    fn constants_match_reference_decimals_and_order() {
        let k = constants();
        assert!((k.mu0_minus + 5.6172).abs() < 5e-4);
        assert!((k.mu0_plus + 2.0623).abs() < 5e-4);
        assert!((k.mu1_minus + 5.7523).abs() < 5e-4);
        assert!((k.mu1_plus + 2.9272).abs() < 5e-4);
        assert!(k.mu1_minus < k.mu0_minus);
        assert!(k.mu0_minus < k.mu1_plus);
        assert!(k.mu1_plus < k.mu0_plus);
        assert!(k.mu0_plus < 0.0);
    }

    #[test]
    fn constants_are_roots_of_the_edge_limit() {
        // with lambda = 0 the lower-edge limit is (1 + mu b0)(1 + mu f0) - 2 mu^2 e0^2
        let t = ThresholdFunctions::lower_edge_limits();
        let k = constants();
        for mu in [k.mu0_minus, k.mu0_plus] {
            let v = (1.0 + mu * t.b) * (1.0 + mu * t.f) - 2.0 * mu * mu * t.e * t.e;
            assert!(v.abs() < 1e-12, "{mu} {v}");
        }
        // the lambda-linear part vanishes at mu1
        for mu in [k.mu1_minus, k.mu1_plus] {
            let with = DeterminantBreakdown::from_functions(CouplingPair { lambda: 1.0, mu }, &t);
            let without =
                DeterminantBreakdown::from_functions(CouplingPair { lambda: 0.0, mu }, &t);
            assert!((with.total - without.total).abs() < 1e-12, "{mu}");
        }
    }

    #[test]
    fn free_determinant_is_one() {
        for z in [-4.0, -1e-3, 8.5, 100.0] {
            let b = delta(CouplingPair::FREE, z, g(64)).unwrap();
            assert_eq!(b.total, 1.0);
        }
    }

    #[test]
    fn lambda_only_reduces_to_first_factor() {
        let t = threshold_functions(-1.0, g(256)).unwrap();
        let b = DeterminantBreakdown::from_functions(
            CouplingPair {
                lambda: 1.0,
                mu: 0.0,
            },
            &t,
        );
        assert_eq!(b.delta_12, 0.0);
        assert!((b.total - (1.0 + t.a)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_equals_system_determinant() {
        let t = threshold_functions(-0.8, g(128)).unwrap();
        for &(l, m) in &[(1.0, -2.0), (-20.0, -8.0), (13.0, 4.5), (0.0, -30.0)] {
            let c = CouplingPair { lambda: l, mu: m };
            let closed = DeterminantBreakdown::from_functions(c, &t);
            let direct = det3(&system_matrix(c, &t));
            assert!((closed.total - direct).abs() < 1e-12 * (1.0 + direct.abs()));
            assert!(
                (closed.total - (closed.delta_lambda0 * closed.delta_0mu + closed.delta_12)).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn c_constant_free_case_and_curve() {
        let k = constants();
        let free = c_constant(Side::Below, CouplingPair::FREE);
        assert!(free > 0.0);
        assert!((free - asymptote_prefactor() * 8.0 * k.mu0_plus * k.mu0_minus).abs() < 1e-14);
        for mu in [-10.0, -4.0, 0.0, 3.0] {
            let lambda = -8.0 * (mu - k.mu0_plus) * (mu - k.mu0_minus)
                / ((mu - k.mu1_plus) * (mu - k.mu1_minus));
            let v = c_constant(Side::Below, CouplingPair { lambda, mu });
            assert!(v.abs() < 1e-12 * (1.0 + lambda.abs()), "{mu} {v}");
        }
    }

    #[test]
    fn six_by_six_factorises_at_zero_k() {
        for &(l, m, z) in &[(-20.0, -8.0, -3.0), (4.0, 7.0, 9.5), (1.0, -1.0, -0.5)] {
            let c = CouplingPair { lambda: l, mu: m };
            let full = delta_general_k(c, Quasimomentum::ZERO, z, g(96)).unwrap();
            let d = delta(c, z, g(96)).unwrap().total;
            assert!(
                (full - d * d).abs() < 1e-9 * (1.0 + full.abs()),
                "{full} {d}"
            );
        }
        assert_eq!(
            delta_general_k(
                CouplingPair::FREE,
                Quasimomentum::new(0.4, 1.1),
                -1.0,
                g(16)
            )
            .unwrap(),
            1.0
        );
    }

    #[test]
    fn six_by_six_is_product_of_parity_blocks() {
        let c = CouplingPair {
            lambda: -7.0,
            mu: 3.0,
        };
        let k = Quasimomentum::new(1.3, -0.4);
        for z in [-2.0, 9.0] {
            let full = delta_general_k(c, k, z, g(64)).unwrap();
            let [p, q] = parity_determinants_at(c, k, z, g(64)).unwrap();
            assert!((full - p * q).abs() < 1e-11 * (1.0 + full.abs()));
        }
    }

    #[test]
    fn block_determinant_at_zero_k_is_the_closed_form() {
        let c = CouplingPair {
            lambda: 5.0,
            mu: -9.0,
        };
        let z = -0.4;
        let [p, q] = parity_determinants_at(c, Quasimomentum::ZERO, z, g(128)).unwrap();
        let d = delta(c, z, g(128)).unwrap().total;
        assert!((p - d).abs() < 1e-12 && (q - d).abs() < 1e-12);
    }

    #[test]
    fn interaction_norm_bounds_strengths() {
        let c = CouplingPair {
            lambda: -30.0,
            mu: 4.0,
        };
        assert_eq!(c.interaction_norm(), 15.0);
        let c = CouplingPair {
            lambda: 1.0,
            mu: -4.0,
        };
        assert_eq!(c.interaction_norm(), 4.0);
        assert!(CouplingPair::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn site_potential_table() {
        let c = CouplingPair {
            lambda: 2.0,
            mu: 6.0,
        };
        assert_eq!(c.site_potential(1, 0), 1.0);
        assert_eq!(c.site_potential(0, -1), 1.0);
        assert_eq!(c.site_potential(-2, 0), 3.0);
        assert_eq!(c.site_potential(1, -1), 6.0);
        assert_eq!(c.site_potential(0, 0), 0.0);
        assert_eq!(c.site_potential(2, 1), 0.0);
    }
}
