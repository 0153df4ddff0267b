//! Numerical construction and verification of complete conformal minimal
//! surfaces with a prescribed harmonic coordinate, on planar disks and annuli.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod blend;
pub mod config;
pub mod domain;
pub mod driver;
pub mod error;
pub mod export;
pub mod form;
pub mod labyrinth;
pub mod laurent;
pub mod metric;
pub mod quadrature;
pub mod weierstrass;

pub use error::{Error, Result};
pub use num_complex::Complex64;
