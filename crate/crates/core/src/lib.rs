//! Linear antenna array side-lobe synthesis with an ant hill colonization
//! optimizer and two baseline metaheuristics.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ahcoa;
pub mod array_model;
pub mod baselines;
pub mod error;
pub mod harness;
pub mod objectives;
pub mod packing;
pub mod pattern_metrics;
pub mod trace;

pub use error::{Error, Result};
