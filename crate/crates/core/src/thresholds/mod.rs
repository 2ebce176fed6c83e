//! Threshold constructions: the divergent continuous function, the weight
//! sequence forcing full support, and the Korner-Meyer hypothesis tests.

pub mod appendix;
pub mod iistrong;
pub mod km;

pub use appendix::{build_divergent_continuous, build_t0, select_gaps, ThresholdWitness, T0};
pub use iistrong::{build_iistrong_weights, default_eps_schedule, IiStrongSpec, Phi};
pub use km::{km_hypothesis_test, KmTestResult};
