//! Hypothesis values of the Korner-Meyer lemma next to the measured
//! support gap, for empirical comparison.

use serde::{Deserialize, Serialize};

use crate::baire::{support_of_samples, CompactSet};
use crate::error::Result;
use crate::fourier::{self, CoeffVector};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmTestResult {
    pub n: usize,
    pub gamma: f64,
    pub eps: f64,
    pub degree: usize,
    pub grid: usize,
    /// `sum_{|n| <= N} |S^(n)|^2`.
    pub cond1_value: f64,
    /// `sup_{|n| > N} |S^(n)|`; zero and flagged vacuous when `degree <= N`.
    pub cond2_value: f64,
    pub cond2_vacuous: bool,
    pub cond1_pass: bool,
    pub cond2_pass: bool,
    /// `sup_x dist(x, supp)` with circumference 1; `None` if the support is empty.
    pub support_gap: Option<f64>,
}

pub fn km_hypothesis_test(
    s: &CoeffVector,
    n: usize,
    gamma: f64,
    eps: f64,
    grid: usize,
    tau_supp: f64,
) -> Result<KmTestResult> {
    let cond1_value = (-(n as i64)..=n as i64)
        .map(|m| s.get(m).norm_sqr())
        .collect::<CompensatedSum>()
        .value();
    let cond2_vacuous = s.degree() <= n;
    let cond2_value = s
        .iter()
        .filter(|(m, _)| m.unsigned_abs() as usize > n)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max);
    let values = fourier::evaluate_on_grid(s, grid)?.into_samples();
    let moduli: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    let support = support_of_samples(&moduli, tau_supp);
    let support_gap = if support.is_empty() {
        None
    } else {
        Some(CompactSet::full(grid).excess_over(&support)?)
    };
    Ok(KmTestResult {
        n,
        gamma,
        eps,
        degree: s.degree(),
        grid,
        cond1_value,
        cond2_value,
        cond2_vacuous,
        cond1_pass: cond1_value >= gamma,
        cond2_pass: cond2_value <= eps,
        support_gap,
    })
}
