//! The phase diagram: components of the `(λ, μ)` plane on which the number of
//! eigenvalues below (above) the band is constant.
//!
//! The curve `C^-(λ, μ) = 0` is the graph of
//! `λ = -8(μ-μ0⁺)(μ-μ0⁻) / ((μ-μ1⁺)(μ-μ1⁻))`, three branches separated by the
//! asymptotes `μ = μ1⁺` and `μ = μ1⁻`. They cut the plane into `C_0^-` ..
//! `C_3^-`; the asymptote lines themselves belong to `C_1^-` and `C_2^-`.
//! The `+` picture is the reflection `(λ, μ) -> (-λ, -μ)` of the `-` one.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::determinant::{c_constant, constants, CouplingPair, ThresholdConstants};
use crate::error::{Error, Result};
use crate::torus::Side;

/// Relative tolerance on `C^±` for [`RegionLabel::on_boundary`].
pub const CURVE_TOL: f64 = 1e-9;
/// Absolute tolerance on `|μ ∓ μ1^±|` for [`RegionLabel::on_boundary`].
pub const ASYMPTOTE_TOL: f64 = 1e-9;
/// Curve samples closer than this to an asymptote are dropped.
pub const ASYMPTOTE_GAP: f64 = 1e-6;

/// `C_α^- ∩ C_β^+` together with the eigenvalue counts it predicts at `K = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub minus_component: u8,
    pub plus_component: u8,
    pub expected_n_below: u32,
    pub expected_n_above: u32,
    pub on_boundary: bool,
}

/// The ten intersections that occur, as `(α, β)`.
pub const REGIONS: [(u8, u8); 10] = [
    (3, 0),
    (2, 0),
    (2, 1),
    (1, 1),
    (1, 0),
    (0, 0),
    (0, 1),
    (0, 2),
    (1, 2),
    (0, 3),
];

impl RegionLabel {
    /// `"C30"`, `"C11"`, ...
    pub fn name(&self) -> String {
        format!("C{}{}", self.minus_component, self.plus_component)
    }

    pub fn is_region(&self) -> bool {
        REGIONS.contains(&(self.minus_component, self.plus_component))
    }

    pub fn component(&self, side: Side) -> u8 {
        match side {
            Side::Below => self.minus_component,
            Side::Above => self.plus_component,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}|{}",
            self.name(),
            self.expected_n_below,
            self.expected_n_above
        )
    }
}

/// `λ` on the curve `C^∓ = 0` at this `μ`; infinite on an asymptote.
pub fn curve_lambda(side: Side, mu: f64) -> f64 {
    curve_lambda_with(&constants(), side, mu)
}

fn curve_lambda_with(k: &ThresholdConstants, side: Side, mu: f64) -> f64 {
    match side {
        Side::Below => {
            -8.0 * (mu - k.mu0_plus) * (mu - k.mu0_minus) / ((mu - k.mu1_plus) * (mu - k.mu1_minus))
        }
        Side::Above => {
            8.0 * (mu + k.mu0_plus) * (mu + k.mu0_minus) / ((mu + k.mu1_plus) * (mu + k.mu1_minus))
        }
    }
}

/// The two asymptotes on `side`, ascending.
pub fn asymptotes(side: Side) -> [f64; 2] {
    let k = constants();
    match side {
        Side::Below => [k.mu1_minus, k.mu1_plus],
        Side::Above => [-k.mu1_plus, -k.mu1_minus],
    }
}

fn minus_component(k: &ThresholdConstants, lambda: f64, mu: f64) -> u8 {
    let (m1m, m1p) = (k.mu1_minus, k.mu1_plus);
    if mu == m1p {
        return 1;
    }
    if mu == m1m {
        return 2;
    }
    let curve = curve_lambda_with(k, Side::Below, mu);
    if mu > m1p {
        if lambda > curve {
            0
        } else {
            1
        }
    } else if mu > m1m {
        if lambda < curve {
            2
        } else {
            1
        }
    } else if lambda > curve {
        2
    } else {
        3
    }
}

fn plus_component(k: &ThresholdConstants, lambda: f64, mu: f64) -> u8 {
    // C_k^+ is the image of C_k^- under (λ, μ) -> (-λ, -μ); the asymptote
    // lines μ = -μ1^± map onto μ = μ1^± exactly, so this is literal
    minus_component(k, -lambda, -mu)
}

/// Place a coupling pair in the phase diagram.
pub fn classify(coupling: CouplingPair) -> RegionLabel {
    let k = constants();
    let CouplingPair { lambda, mu } = coupling;
    let alpha = minus_component(&k, lambda, mu);
    let beta = plus_component(&k, lambda, mu);
    let scale = 1.0 + lambda.abs() + mu * mu;
    let near_curve = Side::BOTH
        .iter()
        .any(|&s| c_constant(s, coupling).abs() < CURVE_TOL * scale);
    let near_asymptote = [k.mu1_minus, k.mu1_plus]
        .iter()
        .any(|&a| (mu - a).abs() < ASYMPTOTE_TOL || (mu + a).abs() < ASYMPTOTE_TOL);
    RegionLabel {
        minus_component: alpha,
        plus_component: beta,
        expected_n_below: 2 * u32::from(alpha),
        expected_n_above: 2 * u32::from(beta),
        on_boundary: near_curve || near_asymptote,
    }
}

/// Predicted `(n_below, n_above)` at `K = 0`, counted with multiplicity.
pub fn expected_counts(label: &RegionLabel) -> Result<(u32, u32)> {
    if label.on_boundary {
        return Err(Error::OnBoundary {
            minus: label.minus_component,
            plus: label.plus_component,
        });
    }
    if !label.is_region() {
        return Err(Error::NotARegion {
            minus: label.minus_component,
            plus: label.plus_component,
        });
    }
    Ok((
        2 * u32::from(label.minus_component),
        2 * u32::from(label.plus_component),
    ))
}

/// One smooth piece of a curve `C^∓ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveBranch {
    pub side: Side,
    /// 0, 1, 2 from the smallest `μ` upward.
    pub branch: u8,
    /// `(λ, μ)` points in increasing `μ`.
    pub points: Vec<(f64, f64)>,
}

/// Sample the three branches of `C^∓(λ, μ) = 0` for `μ` in `[mu_lo, mu_hi]`.
///
/// Branches that do not meet the range come back empty.
pub fn boundary_curves(
    side: Side,
    mu_lo: f64,
    mu_hi: f64,
    samples: usize,
) -> Result<Vec<CurveBranch>> {
    if !(mu_lo.is_finite() && mu_hi.is_finite()) || mu_lo >= mu_hi {
        return Err(Error::EmptyRange {
            lo: mu_lo,
            hi: mu_hi,
        });
    }
    if samples < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: samples,
        });
    }
    let k = constants();
    let [a0, a1] = asymptotes(side);
    let mut branches: Vec<CurveBranch> = (0..3)
        .map(|b| CurveBranch {
            side,
            branch: b,
            points: Vec::new(),
        })
        .collect();
    for i in 0..samples {
        let mu = mu_lo + (mu_hi - mu_lo) * i as f64 / (samples - 1) as f64;
        if (mu - a0).abs() < ASYMPTOTE_GAP || (mu - a1).abs() < ASYMPTOTE_GAP {
            continue;
        }
        let b = if mu < a0 {
            0
        } else if mu < a1 {
            1
        } else {
            2
        };
        branches[b]
            .points
            .push((curve_lambda_with(&k, side, mu), mu));
    }
    Ok(branches)
}
