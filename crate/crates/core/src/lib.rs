//! Commuting pairs of finite convolution operators and second-order
//! differential operators on `[-1, 1]`, with numerical certification of the
//! commutation identities.

pub mod cli;
pub mod discretization;
pub mod error;
pub mod expr;
pub mod families;
pub mod jet;
pub mod normality;
pub mod residual;
pub mod spectra;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C = num_complex::Complex64;
