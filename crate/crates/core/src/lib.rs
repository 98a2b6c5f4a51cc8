//! Cubature on scattered data.
//!
//! Scattered samples of an integrand are turned into an interpolant, and the
//! interpolant is evaluated at the nodes of a known positive-interior
//! algebraic cubature rule. Four adaptive interpolants are provided (moving
//! polynomial interpolation at discrete Leja points, LOOCV-tuned RBF, RBF
//! partition of unity, Multinode Shepard), together with a least-squares
//! moment-matching baseline and a convergence-study harness.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cubature;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod moving;
pub mod mshep;
pub mod poly;
pub mod pum;
pub mod rbf;
pub mod rules;
pub mod testfns;

pub use error::{Error, Result};
pub use geometry::{Domain, Point2, PointSet};
