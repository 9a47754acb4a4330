//! Kirkwood-Dirac quasiprobabilities and the split of measurement
//! uncertainty into quantum and classical parts.

pub mod error;
pub mod json;
pub mod kd;
pub mod linalg;
pub mod optimize;
pub mod random;
pub mod selftest;
pub mod state;
pub mod uncertainty;
pub mod witness;

pub use error::{Error, Result};
