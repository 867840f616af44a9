//! Discrete spectrum of two identical fermions on the square lattice with
//! nearest and next-nearest neighbour interactions.
//!
//! For a quasimomentum `K` the two-particle fiber operator acts on odd
//! functions on the torus as `H(K) = H0(K) + V`, with
//! `E_K(p) = 2 Σ (1 - cos(K_i/2) cos p_i)` and a potential supported on the
//! first two shells, `λ/2` on `(±1, 0), (0, ±1)`, `μ/2` on `(±2, 0), (0, ±2)`
//! and `μ` on the diagonals `(±1, ±1)`. Its eigenvalues outside the band are
//! the zeros of a finite determinant.
//!
//! * [`torus`]: dispersion, band edges, periodic quadrature grids
//! * [`quadrature`]: resolvent moments and the six threshold functions
//! * [`determinant`]: `Δ_{λμ}(z)` and its edge constants `C^±`
//! * [`solver`]: eigenvalues with multiplicity at any `K`
//! * [`atlas`]: the ten regions of the `(λ, μ)` plane
//! * [`oracle`]: brute-force discretisations used as cross-checks
//! * [`verification`]: the acceptance checks
//!
//! ```
//! use fermipair::{atlas::classify, determinant::CouplingPair, solver::spectrum};
//! use fermipair::torus::{GridSpec, Quasimomentum};
//!
//! let p = CouplingPair::new(-30.0, -20.0)?;
//! assert_eq!(classify(p).name(), "C30");
//! let rep = spectrum(p, Quasimomentum::ZERO, GridSpec::new(64)?)?;
//! assert_eq!((rep.n_below, rep.n_above), (6, 0));
//! # Ok::<(), fermipair::Error>(())
//! ```

pub mod atlas;
pub mod determinant;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod torus;
pub mod verification;

pub use atlas::{classify, RegionLabel};
pub use determinant::CouplingPair;
pub use error::{Error, Result};
pub use solver::{spectrum, SpectralReport};
pub use torus::{GridSpec, Quasimomentum, Side};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/model.md")]
    struct Model;
    #[doc = include_str!("../../../book/src/determinant.md")]
    struct Determinant;
    #[doc = include_str!("../../../book/src/regions.md")]
    struct Regions;
    #[doc = include_str!("../../../book/src/oracles.md")]
    struct Oracles;
}
