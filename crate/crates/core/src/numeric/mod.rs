//! Numerical building blocks: quadrature, bracketing solvers, grid suprema,
//! compensated summation and log-factorials.

pub mod quad;
pub mod roots;
pub mod special;
pub mod sum;

pub use quad::{integrate, Integrator};
pub use roots::{bisect, golden_max, golden_min, sup_on_interval};
pub use sum::NeumaierSum;
