//! Localizing functions `psi_eps`: smooth, mean one, `0 <= psi <= 1 + eps`,
//! vanishing on an arc around `theta = 0`, with weighted coefficient energy
//! `sum_{n != 0} |psi^(n)|^2 lambda_|n| <= eps^2`.
//!
//! `psi = 1 - (1/L) sum_{ceil(1/eps) <= j <= S} lambda_j^{-1} g_{1/j}` where the
//! blocks share one shape and one plateau half-width `delta` (in units of
//! `1/j`). Every block equals 1 on `|theta| <= delta/j`, so `psi` vanishes on
//! `|theta| <= delta/S`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::blocks::BlockShape;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fourier::{self, CoeffVector, GridFunction};
use crate::numeric::{ls_slope, CompensatedSum};
use crate::weights::{check_divergence_from, estimate_m, WeightSequence};

/// Largest plateau half-width tried, in units of `1/j`.
const DELTA_START: f64 = 0.25;
const DELTA_RATIO: f64 = 0.7;
const DELTA_STEPS: usize = 24;
const MAX_HALVINGS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizerParams {
    pub epsilon: f64,
    pub m: u32,
    pub s: usize,
    pub l_value: f64,
    pub j_min: usize,
    /// Working epsilon after the rescaling loop.
    pub working_epsilon: f64,
    /// Floor parameter of the blocks, `ceil(2/working_epsilon)`.
    pub block_s: u32,
    pub delta: f64,
}

/// Smallest `S > 2/eps` with `L = sum_{ceil(1/eps) <= j <= S} 1/lambda_j >= 1/eps`.
pub fn choose_s(w: &WeightSequence, epsilon: f64, scan_cap: usize) -> Result<LocalizerParams> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let j_min = (1.0 / epsilon - 1e-12).ceil() as usize;
    let s_floor = (2.0 / epsilon + 1e-12).floor() as usize + 1;
    let target = 1.0 / epsilon;
    let table = w.table(scan_cap)?;
    let mut acc = CompensatedSum::new();
    for j in j_min..=scan_cap {
        acc.add(1.0 / table[j]);
        if j >= s_floor && acc.value() >= target {
            return Ok(LocalizerParams {
                epsilon,
                m: 0,
                s: j,
                l_value: acc.value(),
                j_min,
                working_epsilon: epsilon,
                block_s: 0,
                delta: 0.0,
            });
        }
    }
    let witness = check_divergence_from(w, j_min, target, scan_cap)?;
    Err(Error::DivergencePremise {
        from: j_min,
        cap: scan_cap,
        target,
        partial_sum: witness.partial_sum_at_cap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizerOptions {
    pub grid: usize,
    /// Scan cap for `choose_s`.
    pub scan_cap: usize,
    /// Range over which `M` is estimated.
    pub m_cap: usize,
    /// Added to the estimated `M`.
    pub m_margin: u32,
}

impl Default for LocalizerOptions {
    fn default() -> Self {
        Self {
            grid: 16384,
            scan_cap: 1_000_000,
            m_cap: 100_000,
            m_margin: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizerReport {
    pub epsilon: f64,
    pub grid: usize,
    pub grid_min: f64,
    pub grid_max: f64,
    /// Grid indices of the zero run around `theta = 0`, as `(-left, right)`.
    pub zero_run: Option<(i64, i64)>,
    /// Length (radians) of the open arc between the nearest grid points
    /// outside the zero run.
    pub deleted_arc_length: f64,
    pub residual_sup: f64,
    pub mean: f64,
    pub mean_exact: bool,
    pub coeff_sup: f64,
    pub decay_slope: Option<f64>,
    pub weighted_tail: f64,
    pub pass_range: bool,
    pub pass_deleted_arc: bool,
    pub pass_mean: bool,
    pub pass_coeff_sup: bool,
    pub pass_tail: bool,
    pub all_pass: bool,
}

/// Per-attempt record of the rescaling loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub working_epsilon: f64,
    pub delta: f64,
    pub weighted_tail: f64,
    pub zero_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localizer {
    pub params: LocalizerParams,
    pub grid: usize,
    pub psi: CoeffVector,
    pub report: LocalizerReport,
    pub attempts: Vec<Attempt>,
}

impl Localizer {
    /// Grid samples of `psi` (real parts).
    pub fn samples(&self) -> Vec<f64> {
        fourier::evaluate_on_grid(&self.psi, self.grid)
            .map(|g| g.real())
            .expect("grid validated at build time")
    }
}

struct Assembly {
    samples: Vec<f64>,
    psi: CoeffVector,
}

fn assemble(
    table: &[f64],
    params: &LocalizerParams,
    shape: &BlockShape,
    delta: f64,
    size: usize,
) -> Result<Assembly> {
    let blocks: Vec<Vec<f64>> = (params.j_min..=params.s)
        .into_par_iter()
        .map(|j| shape.sample(1.0 / j as f64, delta, size).map(|(s, _)| s))
        .collect::<Result<_>>()?;
    let mut samples = vec![1.0; size];
    for (j, g) in (params.j_min..=params.s).zip(&blocks) {
        let c = 1.0 / (params.l_value * table[j]);
        for (p, v) in samples.iter_mut().zip(g) {
            *p -= c * v;
        }
    }
    let grid = GridFunction::new(samples.iter().map(|v| Complex64::new(*v, 0.0)).collect())?;
    let mut psi = fourier::interpolate(&grid).real_part();
    psi.set(0, Complex64::new(1.0, 0.0));
    Ok(Assembly { samples, psi })
}

fn weighted_tail(psi: &CoeffVector, table: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for (n, c) in psi.iter() {
        if n != 0 {
            acc.add(c.norm_sqr() * table[n.unsigned_abs() as usize]);
        }
    }
    acc.value()
}

fn zero_run(values: &[f64], tau: f64) -> Option<(i64, i64)> {
    let g = values.len();
    if values[0].abs() > tau {
        return None;
    }
    let mut right = 0;
    while right + 1 < g && values[right + 1].abs() <= tau {
        right += 1;
    }
    if right + 1 == g {
        return Some((0, g as i64 - 1));
    }
    let mut left = 0;
    while values[g - 1 - left].abs() <= tau {
        left += 1;
    }
    Some((-(left as i64), right as i64))
}

/// Builds `psi_eps`, descending the plateau ladder and halving the working
/// epsilon until the weighted tail is at most `eps^2` with a non-empty zero arc.
pub fn build_localizer(
    w: &WeightSequence,
    epsilon: f64,
    opts: &LocalizerOptions,
    tol: &Tolerances,
) -> Result<Localizer> {
    fourier::check_grid(opts.grid)?;
    let mut params = choose_s(w, epsilon, opts.scan_cap)?;
    params.m = estimate_m(w, opts.m_cap)?.m_est + opts.m_margin;
    let size = opts.grid;
    // The finest block has eta = 1/S and needs G >= 64/eta.
    if (size as f64) < 64.0 * params.s as f64 {
        return Err(Error::LocalizerFailed {
            epsilon,
            reason: format!("grid {size} cannot resolve the finest block scale 1/{} (need G >= 64 S)", params.s),
        });
    }
    let table = w.table(size / 2)?;
    let mut attempts = Vec::new();
    let mut eps_w = epsilon;
    for _ in 0..=MAX_HALVINGS {
        let block_s = (2.0 / eps_w - 1e-12).ceil() as u32;
        let shape = BlockShape::new(params.m, block_s)?;
        let fit = 0.95 * PI * params.j_min as f64 / shape.support_factor();
        let mut delta = DELTA_START.min(fit);
        for _ in 0..DELTA_STEPS {
            let asm = assemble(&table, &params, &shape, delta, size)?;
            let tail = weighted_tail(&asm.psi, &table);
            let zeros = zero_run(&asm.samples, tol.tau_supp)
                .map_or(0, |(l, r)| (r - l + 1) as usize);
            attempts.push(Attempt {
                working_epsilon: eps_w,
                delta,
                weighted_tail: tail,
                zero_points: zeros,
            });
            if zeros == 0 {
                break;
            }
            if tail <= epsilon * epsilon {
                params.working_epsilon = eps_w;
                params.block_s = block_s;
                params.delta = delta;
                let report = verify_psi(&asm.psi, epsilon, size, w, tol)?;
                return Ok(Localizer {
                    params,
                    grid: size,
                    psi: asm.psi,
                    report,
                    attempts,
                });
            }
            delta *= DELTA_RATIO;
        }
        eps_w *= 0.5;
    }
    let best = attempts
        .iter()
        .filter(|a| a.zero_points > 0)
        .map(|a| a.weighted_tail)
        .fold(f64::INFINITY, f64::min);
    Err(Error::LocalizerFailed {
        epsilon,
        reason: format!(
            "rescaling loop exhausted after {MAX_HALVINGS} halvings; smallest weighted tail with a \
             deleted arc was {best} > eps^2 = {} (property (v))",
            epsilon * epsilon
        ),
    })
}

/// Measures the five localizer properties of `psi` on a `G`-grid.
pub fn verify_psi(
    psi: &CoeffVector,
    epsilon: f64,
    size: usize,
    w: &WeightSequence,
    tol: &Tolerances,
) -> Result<LocalizerReport> {
    let values = fourier::evaluate_on_grid(psi, size)?.real();
    let table = w.table(psi.degree())?;
    let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let grid_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let run = zero_run(&values, tol.tau_supp);
    let step = 2.0 * PI / size as f64;
    let (deleted_arc_length, residual_sup) = match run {
        Some((l, r)) => {
            let res = (l..=r)
                .map(|k| values[k.rem_euclid(size as i64) as usize].abs())
                .fold(0.0, f64::max);
            (((r - l + 2) as f64 * step).min(2.0 * PI), res)
        }
        None => (0.0, values[0].abs()),
    };
    let mean = psi.get(0).re;
    let mean_exact = psi.get(0) == Complex64::new(1.0, 0.0);
    let coeff_sup = psi.sup_nonzero();
    let weighted_tail = weighted_tail(psi, &table);

    let pass_range = grid_min >= -tol.tau_range && grid_max <= 1.0 + epsilon + tol.tau_range;
    let pass_deleted_arc = run.is_some() && residual_sup <= tol.tau_supp;
    let pass_coeff_sup = coeff_sup <= epsilon + tol.tau_range;
    let pass_tail = weighted_tail <= epsilon * epsilon;
    Ok(LocalizerReport {
        epsilon,
        grid: size,
        grid_min,
        grid_max,
        zero_run: run,
        deleted_arc_length,
        residual_sup,
        mean,
        mean_exact,
        coeff_sup,
        decay_slope: decay_slope(psi),
        weighted_tail,
        pass_range,
        pass_deleted_arc,
        pass_mean: mean_exact,
        pass_coeff_sup,
        pass_tail,
        all_pass: pass_range && pass_deleted_arc && mean_exact && pass_coeff_sup && pass_tail,
    })
}

pub fn verify_localizer(l: &Localizer, w: &WeightSequence, tol: &Tolerances) -> Result<LocalizerReport> {
    verify_psi(&l.psi, l.params.epsilon, l.grid, w, tol)
}

/// Log-log slope of the decreasing envelope `sup_{m >= n} |psi^(m)|` over
/// the top octave of frequencies carrying more than `1e-12` of the peak.
fn decay_slope(psi: &CoeffVector) -> Option<f64> {
    let n_max = psi.degree();
    let peak = psi.sup_nonzero();
    if peak == 0.0 {
        return None;
    }
    let mags: Vec<f64> = (0..=n_max as i64)
        .map(|n| psi.get(n).norm().max(psi.get(-n).norm()))
        .collect();
    let top = (1..=n_max).rev().find(|&n| mags[n] > 1e-12 * peak)?;
    let lo = (top / 2).max(1);
    let mut env = 0.0f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in (lo..=top).rev() {
        env = env.max(mags[n]);
        xs.push((n as f64).ln());
        ys.push(env.ln());
    }
    ls_slope(&xs, &ys)
}
