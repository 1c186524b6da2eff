//! Independent checks of the pricing formulas: path simulation and direct
//! integration of the Riccati system.

pub mod mc;
pub mod riccati;

pub use mc::{simulate_svj, simulate_svj_grid, McConfig, McEstimate, McGrid};
pub use riccati::riccati_numeric;
