//! A continuous function whose coefficients are not in `l2(lambda)` for any
//! `lambda_n` increasing to infinity: `f = sum_j lambda_{n_j}^{-1/2} zeta^{n_j} T0`
//! with spectrally disjoint blocks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{self, CoeffVector, GridFunction};
use crate::numeric::CompensatedSum;
use crate::weights::WeightSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T0 {
    pub poly: CoeffVector,
    pub n0: usize,
    pub grid: usize,
    pub sup: f64,
    pub l2: f64,
    /// Factor `1/max(1, sup)` applied after the Fejer mean.
    pub scale: f64,
}

/// Real part of the Fejer mean of order `K` of `e^{i cos theta}`, scaled into
/// the unit ball of `L^inf`. Doubles `K` (at most three times) if the `L^2`
/// norm falls below 1/2.
pub fn build_t0(k: usize, grid: usize) -> Result<T0> {
    if k < 4 {
        return Err(Error::InvalidParameter(format!("T0 needs K >= 4, got {k}")));
    }
    let mut k = k;
    let mut last = None;
    for _ in 0..4 {
        let t0 = t0_once(k, grid)?;
        if t0.l2 >= 0.5 {
            return Ok(t0);
        }
        last = Some(t0.l2);
        k *= 2;
    }
    Err(Error::InvalidParameter(format!(
        "T0 has L2 norm {} < 1/2 after doubling K to {}",
        last.unwrap_or(0.0),
        k / 2
    )))
}

fn t0_once(k: usize, grid: usize) -> Result<T0> {
    let size = grid.max((2 * k + 2).next_power_of_two());
    let h = GridFunction::from_fn(size, |t| Complex64::from_polar(1.0, t.cos()))?;
    let hk = fourier::dft(&h, Some(k))?;
    let mean = fourier::fejer_mean(&hk, k).real_part();
    let values = fourier::evaluate_on_grid(&mean, size)?;
    let sup = values.max_abs();
    let scale = 1.0 / sup.max(1.0);
    let poly = mean.scaled(scale);
    let values = fourier::evaluate_on_grid(&poly, size)?;
    Ok(T0 {
        n0: k,
        grid: size,
        sup: values.max_abs(),
        l2: values.l2_norm(),
        scale,
        poly,
    })
}

/// `n_j` = smallest index `> max(n_{j-1} + 2 N0, 2 N0)` with `lambda >= (j+1)^4`.
pub fn select_gaps(w: &WeightSequence, count: usize, n0: usize, cap: usize) -> Result<Vec<usize>> {
    let table = w.table(cap)?;
    let mut gaps = Vec::with_capacity(count);
    let mut prev: Option<usize> = None;
    for j in 1..=count {
        let from = prev.map_or(2 * n0, |p| p + 2 * n0).max(2 * n0) + 1;
        let threshold = ((j + 1) as f64).powi(4);
        let n = (from..=cap)
            .find(|&n| table[n] >= threshold)
            .ok_or(Error::UnboundedPremise {
                index: j,
                from,
                cap,
                threshold,
            })?;
        gaps.push(n);
        prev = Some(n);
    }
    Ok(gaps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdWitness {
    pub n0: usize,
    pub t0_sup: f64,
    pub t0_l2: f64,
    pub gaps: Vec<usize>,
    /// `sum_{|n|} |f^(n)|^2 lambda_|n|` over the first `J'` blocks, `J' = 1..=J`.
    pub weighted_partial_sums: Vec<f64>,
    /// `sum_{j <= J'} lambda_{n_j}^{-1/2}`.
    pub mtest_partial_sums: Vec<f64>,
    pub grid: usize,
    pub sup_norm: f64,
    pub sup_bound: f64,
    /// `J' -> sup |f_J - f_J'|` over the last quarter of blocks.
    pub cauchy_sup: Vec<(usize, f64)>,
    /// `J' -> sum_{J' < j <= J} lambda_{n_j}^{-1/2}`.
    pub cauchy_bound: Vec<(usize, f64)>,
    /// `sum_{j > 3J/4} lambda_{n_j}^{-1/2}`, reported for reference.
    pub scalar_tail: f64,
    pub disjoint: bool,
    pub pass_divergence: bool,
    pub pass_sup: bool,
    pub pass_cauchy: bool,
    pub pass_t0: bool,
    #[serde(skip)]
    pub partial_f: CoeffVector,
}

const TAU: f64 = 1e-9;
const CAUCHY_SLACK: f64 = 1e-6;

/// Builds `f_J` and its witnesses. `t0_grid` is the grid on which `T0` is checked.
pub fn build_divergent_continuous(
    w: &WeightSequence,
    count: usize,
    k: usize,
    t0_grid: usize,
    cap: usize,
) -> Result<ThresholdWitness> {
    let t0 = build_t0(k, t0_grid)?;
    let n0 = t0.n0;
    let gaps = select_gaps(w, count, n0, cap)?;
    for pair in gaps.windows(2) {
        if pair[1] - pair[0] < 2 * n0 + 1 {
            return Err(Error::BlockOverlap(pair[1]));
        }
    }
    let degree = gaps.last().map_or(n0, |n| n + n0);
    let table = w.table(degree)?;
    let coef: Vec<f64> = gaps.iter().map(|&n| table[n].powf(-0.5)).collect();

    let mut f = CoeffVector::zeros(degree);
    let mut owner = vec![usize::MAX; 2 * degree + 1];
    let mut disjoint = true;
    let mut energy = CompensatedSum::new();
    let mut weighted_partial_sums = Vec::with_capacity(count);
    for (j, (&nj, &cj)) in gaps.iter().zip(&coef).enumerate() {
        for (m, c) in t0.poly.iter() {
            let n = nj as i64 + m;
            let slot = (n + degree as i64) as usize;
            if owner[slot] != usize::MAX {
                disjoint = false;
            }
            owner[slot] = j;
            let v = c * cj;
            f.set(n, f.get(n) + v);
            energy.add(v.norm_sqr() * table[n.unsigned_abs() as usize]);
        }
        weighted_partial_sums.push(energy.value());
    }
    let mut acc = CompensatedSum::new();
    let mtest_partial_sums: Vec<f64> = coef
        .iter()
        .map(|c| {
            acc.add(*c);
            acc.value()
        })
        .collect();

    let grid = (2 * degree + 2).next_power_of_two();
    let values = fourier::evaluate_on_grid(&f, grid)?;
    let sup_norm = values.max_abs();
    let sup_bound = mtest_partial_sums.last().copied().unwrap_or(0.0);

    // Uniform Cauchy over the last quarter: f_J - f_J' only holds blocks J'+1..J.
    let start = count - count / 4;
    let mut cauchy_sup = Vec::new();
    let mut cauchy_bound = Vec::new();
    for jp in start..count {
        let mut tail = CoeffVector::zeros(degree);
        for j in jp..count {
            for (m, c) in t0.poly.iter() {
                let n = gaps[j] as i64 + m;
                tail.set(n, c * coef[j]);
            }
        }
        let s = fourier::evaluate_on_grid(&tail, grid)?.max_abs();
        cauchy_sup.push((jp, s));
        cauchy_bound.push((jp, coef[jp..].iter().sum()));
    }
    let scalar_tail = coef[start..].iter().sum();

    let pass_divergence = weighted_partial_sums
        .iter()
        .enumerate()
        .all(|(j, e)| *e >= (j + 1) as f64 / 4.0 - TAU);
    let pass_cauchy = cauchy_sup
        .iter()
        .zip(&cauchy_bound)
        .all(|((_, s), (_, b))| *s <= b + CAUCHY_SLACK);
    Ok(ThresholdWitness {
        n0,
        t0_sup: t0.sup,
        t0_l2: t0.l2,
        gaps,
        weighted_partial_sums,
        mtest_partial_sums,
        grid,
        sup_norm,
        sup_bound,
        cauchy_sup,
        cauchy_bound,
        scalar_tail,
        disjoint,
        pass_divergence,
        pass_sup: sup_norm <= sup_bound + TAU,
        pass_cauchy,
        pass_t0: t0.sup <= 1.0 + 1e-12 && t0.l2 >= 0.5,
        partial_f: f,
    })
}
