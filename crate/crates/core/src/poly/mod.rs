//! Polynomial machinery: barycentric interpolants, Chebyshev series and
//! Lebesgue functions.

mod bary;
mod cheb;
mod lebesgue;

pub use bary::{barycentric_weights, BaryPoly, Extremum};
pub use cheb::{chebyshev_second_kind_points, chebyshev_t_values, chebyshev_zeros, ChebPoly};
pub use lebesgue::{alternating_poly, alternating_values, lebesgue_constant, lebesgue_function};
