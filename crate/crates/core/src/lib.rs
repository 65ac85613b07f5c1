//! Positive definite thresholding of correlation matrices.
//!
//! Thresholding a correlation matrix entrywise with an arbitrary function
//! usually destroys positive semidefiniteness. For matrices of rank at most
//! `n` the entrywise maps that preserve it are exactly the positive
//! definite functions on the sphere S^{n-1}, i.e. series in the normalized
//! Gegenbauer polynomials with nonnegative coefficients. This crate
//! constructs such thresholding functions for a prescribed zero set `K`,
//! scores them by their linear coefficient (faithfulness) via Delsarte-style
//! linear programs, and applies them to matrices with full PSD
//! verification.
//!
//! Organized as:
//! - [`gegenbauer`]: normalized polynomial evaluation, derivatives,
//!   harmonic dimensions, series.
//! - [`linalg`]: Jacobi eigensolver, PSD certification, Gauss quadrature,
//!   seeded random Gram matrices.
//! - [`lp`]: dense two-phase simplex for the equality-form LPs.
//! - [`faithfulness`]: faithfulness LPs, closed-form bounds, cap
//!   autocorrelation existence construction, Delsarte code bound.
//! - [`thresholding`]: entrywise application, hard thresholding, shrinkage
//!   repair, deviation reports.
//! - [`io`]: CSV matrices and the JSON coefficient interchange format.
//!
//! The `parallel` feature (on by default) evaluates entrywise maps with
//! rayon; disabling it falls back to equivalent sequential loops.

pub mod error;
pub mod faithfulness;
pub mod gegenbauer;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod thresholding;

pub use error::{Error, Result};
