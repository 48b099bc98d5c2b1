//! Quantization data of integrable systems on surfaces: singular points,
//! Reeb graphs, Bohr-Sommerfeld leaves and truncated Čech cohomology.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cech;
pub mod cli;
pub mod error;
pub mod expr;
pub mod flatmodel;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod poly;
pub mod quadrature;
pub mod quantize;
pub mod reeb;
pub mod report;
pub mod scalar;
pub mod trace;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision jets with complex coefficients.
pub type JetC64 = jet::Jet<num_complex::Complex<f64>>;
/// Exact jets over the Gaussian rationals.
pub type JetExact = jet::Jet<linalg::GaussianRational>;
pub type Poly64 = poly::Poly<f64>;
pub type LocalFlatSection64 = flatmodel::LocalFlatSection<f64>;
