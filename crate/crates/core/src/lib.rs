pub mod error;
pub mod matrix;

pub use error::{Error, Result};
pub mod splitting;
pub mod series;
pub mod newton_schulz;
pub mod richardson;
pub mod harness;
