//! Simulation toolkit for risk-sensitive bandits whose objective is a
//! distortion riskmetric of the mixture of arm distributions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod harness;
pub mod policy;
pub mod riskmetric;
pub mod simplex;

pub use error::{Error, Result};
