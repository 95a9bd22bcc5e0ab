//! Bracketing every zero-crossing of a uniformly sampled signal with
//! 0-dimensional persistence.
//!
//! The pipeline is [`bracketing::sign_split`] → [`thresholding::select_threshold`]
//! → [`bracketing::bracket_split`]. A Lipschitz-based first-crossing baseline
//! lives in [`molinaro`], and [`harness`] runs the accuracy / noise / runtime
//! comparisons between the two.

pub mod bank;
pub mod bracketing;
pub mod error;
pub mod harness;
pub mod iforest;
pub mod molinaro;
pub mod noise;
pub mod persistence;
pub mod series;
pub mod stats;
pub mod thresholding;

pub use error::{Error, Result};
pub use series::TimeSeries;
