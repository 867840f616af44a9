//! Independent brute-force diagonalisations used to check the determinant.

pub mod lanczos;
pub mod momentum;
pub mod position;
mod sector;

pub use momentum::{build_momentum_operator, EigenMethod, MomentumGridOperator, OracleLevel};
pub use position::{build_position_operator, BoxState, PositionBoxOperator};
pub use sector::Parity;
