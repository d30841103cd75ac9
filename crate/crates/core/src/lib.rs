//! Multi-agent surface vessel simulator with potential-field collision avoidance.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apf;
pub mod error;
pub mod frames;
pub mod guidance;
pub mod io;
pub mod mmg;
pub mod montecarlo;
pub mod plot;
pub mod scenario;
pub mod sim;
pub mod vo;

pub use error::{Error, Result};
