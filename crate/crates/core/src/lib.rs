//! Accelerated proximal gradient for `phi = f + h` with strong convexity,
//! optimality certificates and iteration-complexity predictors.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod certificates;
pub mod classic;
pub mod cli;
pub mod engine;
pub mod error;
pub mod problem;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
