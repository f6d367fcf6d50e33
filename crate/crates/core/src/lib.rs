//! Numerical toolkit for complex null curves and the minimal surfaces they
//! project to: Weierstrass-type constructions, conformal metrics and
//! intrinsic distances, period control by spray deformations, and
//! projective proximity estimates for null curves.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complex;
pub mod error;
pub mod geometry;
pub mod period;
pub mod projective;
pub mod scenario;
pub mod weierstrass;

pub use error::{Error, Result};
