//! Numerical constructions in weighted l2 spaces of Fourier coefficients on
//! the circle: weight diagnostics, building blocks and localizers, the
//! finite-stage deletion procedure, threshold witnesses, and representation
//! counts for Sidon sets.

pub mod baire;
pub mod blocks;
pub mod config;
pub mod error;
pub mod fourier;
pub mod localizer;
pub mod numeric;
pub mod report;
pub mod sidon;
pub mod thresholds;
pub mod weights;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use fourier::{CoeffVector, GridFunction};
pub use weights::WeightSequence;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
