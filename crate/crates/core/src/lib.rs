//! Spectral gaps of the Mathieu operator via walk sums.

pub mod asymptotics;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod potential;
pub mod ls_series;
pub mod matrix_oracle;
pub mod walks;

pub use error::{Error, Result};
