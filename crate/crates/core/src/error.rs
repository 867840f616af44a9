use thiserror::Error;

use crate::torus::Band;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("energy {z} lies inside the band [{}, {}]", band.e_min, band.e_max)]
    InsideBand { z: f64, band: Band },

    #[error("the band collapses to the single point {0}; quasimomentum (pi, pi) has no discrete spectrum to speak of")]
    DegenerateBand(f64),

    #[error("grid size {0} is invalid: need an even number of points per axis, at least 8")]
    InvalidGrid(usize),

    #[error("integrand is not finite at ({p1}, {p2})")]
    NonFiniteSample { p1: f64, p2: f64 },

    #[error("coupling constants must be finite, got ({lambda}, {mu})")]
    NonFiniteCoupling { lambda: f64, mu: f64 },

    #[error("basis index {0} out of range 1..=6")]
    BasisIndex(usize),

    #[error("empty range [{lo}, {hi}]")]
    EmptyRange { lo: f64, hi: f64 },

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("point of C{minus}{plus} lies on a phase boundary; eigenvalue counts are not determined there")]
    OnBoundary { minus: u8, plus: u8 },

    #[error("components ({minus}, {plus}) do not form a region of the partition")]
    NotARegion { minus: u8, plus: u8 },

    #[error("margin must be positive, got {0}")]
    InvalidMargin(f64),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
