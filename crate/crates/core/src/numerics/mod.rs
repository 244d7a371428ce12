//! Scalar root finding and quadrature used by the solvers.

mod quadrature;
mod roots;

pub use quadrature::adaptive_simpson;
pub use roots::{bisect, brent, expand_upper_bracket, Bracket, Expansion};
