//! Tolerances shared by every module.
//!
//! All thresholds live here so a run manifest can record exactly what was
//! checked. Defaults follow the per-module acceptance levels.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Block flatness: |g - 1| on the plateau.
    pub tau_flat: f64,
    /// Block floor slack below -1/S.
    pub tau_floor: f64,
    /// Numerical support threshold: samples with |f| <= tau_supp count as zero.
    pub tau_supp: f64,
    /// Slack on range checks such as 0 <= psi <= 1 + eps.
    pub tau_range: f64,
    /// Relative roundtrip tolerance of the transforms.
    pub tau_transform: f64,
    /// Conjugate symmetry tolerance for real-valued coefficient vectors.
    pub tau_symmetry: f64,
    /// Minimal plateau radius of an accepted block, in units of eta.
    pub delta_min: f64,
    /// Upper bound on the measured envelope constant of an accepted block.
    pub a_max: f64,
    /// Doubling ratio above which witnesses are recorded.
    pub doubling_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_flat: 1e-6,
            tau_floor: 1e-9,
            tau_supp: 1e-7,
            tau_range: 1e-9,
            tau_transform: 1e-10,
            tau_symmetry: 1e-12,
            delta_min: 1e-3,
            a_max: 1e6,
            doubling_threshold: 16.0,
        }
    }
}

impl Tolerances {
    /// Apply a `key=value` override, as accepted on the command line.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        let slot = match key {
            "tau_flat" => &mut self.tau_flat,
            "tau_floor" => &mut self.tau_floor,
            "tau_supp" => &mut self.tau_supp,
            "tau_range" => &mut self.tau_range,
            "tau_transform" => &mut self.tau_transform,
            "tau_symmetry" => &mut self.tau_symmetry,
            "delta_min" => &mut self.delta_min,
            "a_max" => &mut self.a_max,
            "doubling_threshold" => &mut self.doubling_threshold,
            other => return Err(format!("unknown tolerance `{other}`")),
        };
        if !(value.is_finite() && value >= 0.0) {
            return Err(format!("tolerance `{key}` must be a finite non-negative number"));
        }
        *slot = value;
        Ok(())
    }
}
