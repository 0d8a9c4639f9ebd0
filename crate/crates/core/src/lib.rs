//! Numerical laboratory for the kink of the semilinear wave equation
//!
//! ```text
//! cosh^2 x u_tt = u_xx + 2u(1 - u^2),    r = sinh x,
//! ```
//!
//! its odd perturbations, the Darboux-transformed linearization and the
//! virial functionals used to monitor local energy decay.

pub mod error;
pub mod experiments;
pub mod grid;
pub mod model;
pub mod operators;
pub mod random;
pub mod solver;
pub mod virial;

pub use error::{Error, Result};
