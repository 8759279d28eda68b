//! Maximal behaviour of polynomials bounded on arbitrary grids.

// `!(a < b)` is used on purpose so that NaN counts as failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod leastsq;
pub mod mockcheb;
pub mod nodes;
pub mod oracle;
pub mod poly;
pub mod quadrature;
pub mod remez;
pub mod special;
pub mod weight;

pub use error::{Error, Result};
pub use nodes::NodeSet;
pub use weight::{Density, Preset, WeightSpec};
