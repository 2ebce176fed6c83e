//! The pair space `(f, E)` with metric `d = d_H(E, K) + ||f - g||_{l2(lambda)}`,
//! the deletion step `f -> c f psi(. - a)`, `E -> E \ J(a)`, and finite runs of it.
//!
//! Functions are grid interpolants of degree `G/2`. Products are taken
//! pointwise on the grid so numerical zeros stay exact; the aliasing this
//! introduces relative to the exact coefficient convolution is measured and
//! charged to the step.

mod compact;

pub use compact::{hausdorff_distance, CompactSet, GridArc};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fourier::{self, CoeffVector, GridFunction};
use crate::localizer::{build_localizer, Localizer, LocalizerOptions};
use crate::numeric::CompensatedSum;
use crate::weights::WeightSequence;

/// Grid points inside a deleted arc must sit this far below `tau_supp`,
/// leaving room for later multiplications by factors up to `(1+eps) c`.
const ARC_SAFETY: f64 = 1.0 / 16.0;

/// A point of the pair space.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    pub f: CoeffVector,
    pub samples: Vec<f64>,
    pub e: CompactSet,
    pub budget_spent: f64,
}

impl PairState {
    /// `f` is interpolated through its values on the grid of `e`.
    pub fn new(f: &CoeffVector, e: CompactSet) -> Result<Self> {
        let size = e.grid();
        let samples = fourier::evaluate_on_grid(f, size)?.real();
        Ok(Self::from_samples(samples, e))
    }

    pub fn from_samples(samples: Vec<f64>, e: CompactSet) -> Self {
        let f = interpolate_real(&samples);
        Self {
            f,
            samples,
            e,
            budget_spent: 0.0,
        }
    }

    pub fn grid(&self) -> usize {
        self.e.grid()
    }
}

fn interpolate_real(samples: &[f64]) -> CoeffVector {
    let g = GridFunction::new(samples.iter().map(|v| Complex64::new(*v, 0.0)).collect())
        .expect("pair grids are powers of two");
    fourier::interpolate(&g).real_part()
}

/// Union of closed grid arcs covering every sample with `|f| > tau`.
/// The result is empty (and `is_empty()` reports it) when no sample exceeds `tau`.
pub fn numerical_support(f: &CoeffVector, size: usize, tau: f64) -> Result<CompactSet> {
    let values = fourier::evaluate_on_grid(f, size)?.real();
    Ok(support_of_samples(&values, tau))
}

pub(crate) fn support_of_samples(values: &[f64], tau: f64) -> CompactSet {
    let g = values.len();
    let above: Vec<bool> = values.iter().map(|v| v.abs() > tau).collect();
    if above.iter().all(|&a| a) {
        return CompactSet::full(g);
    }
    let mut arcs = Vec::new();
    let mut k = 0;
    let first_gap = above.iter().position(|&a| !a).unwrap_or(0);
    while k < g {
        let i = (first_gap + k) % g;
        if above[i] {
            let mut len = 0;
            while k + len + 1 < g && above[(i + len + 1) % g] {
                len += 1;
            }
            arcs.push(GridArc { start: i, len });
            k += len + 1;
        } else {
            k += 1;
        }
    }
    CompactSet::from_arcs(g, &arcs)
}

/// `d_H(E, K) + ||f - g||_{l2(lambda)}`.
pub fn pair_metric(p: &PairState, q: &PairState, w: &WeightSequence) -> Result<f64> {
    Ok(hausdorff_distance(&p.e, &q.e)? + fourier::weighted_distance(&p.f, &q.f, w)?)
}

/// `(1 - delta/2)` times the Fejer mean of order `k`.
pub fn prepare(f_raw: &CoeffVector, delta: f64, k: usize) -> CoeffVector {
    fourier::fejer_mean(f_raw, k).scaled(1.0 - delta / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaireOptions {
    pub localizer: LocalizerOptions,
    pub eps_init: f64,
    pub max_halvings: usize,
    pub prepare_delta: f64,
    /// Fejer order used by `prepare`; `None` means `G/4`.
    pub fejer_order: Option<usize>,
    /// Rescale each product so the mean is kept.
    pub renormalize: bool,
    /// Unspent allowance of earlier steps may be used later.
    pub carry_forward: bool,
    pub keep_snapshots: bool,
}

impl Default for BaireOptions {
    fn default() -> Self {
        Self {
            localizer: LocalizerOptions::default(),
            eps_init: 0.2,
            max_halvings: 12,
            prepare_delta: 0.0,
            fejer_order: None,
            renormalize: true,
            carry_forward: true,
            keep_snapshots: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub point: usize,
    pub theta: f64,
    pub epsilon: f64,
    pub halvings: usize,
    /// `||f_new - f||_{l2(lambda)}`.
    pub l2_increment: f64,
    /// Weighted norm of the aliasing committed by the grid product.
    pub projection_norm: f64,
    pub hausdorff_increment: f64,
    /// `hausdorff_increment + l2_increment + projection_norm`.
    pub charge: f64,
    pub allowance: f64,
    /// Deleted open arc: strictly between `arc_start` and `arc_start + arc_len`.
    pub arc_start: usize,
    pub arc_len: usize,
    /// Length of the deleted arc, circumference 1.
    pub arc_length: f64,
    pub mass_factor: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeletionTrace {
    pub grid: usize,
    pub steps: Vec<StepRecord>,
    pub budgets: Vec<f64>,
    pub budget_total: f64,
    pub total_charged: f64,
    pub initial_mean: f64,
    pub final_mean: f64,
    pub final_weighted_norm: f64,
    pub final_min: f64,
    pub final_max: f64,
    pub nested: bool,
    pub arcs_avoided: bool,
    pub final_support: Vec<[usize; 2]>,
    pub final_e: Vec<[usize; 2]>,
    /// Failed candidates of the epsilon search, keyed by step.
    pub rejected: BTreeMap<usize, Vec<String>>,
}

/// Candidate result of one deletion step.
pub struct StepOutcome {
    pub state: PairState,
    pub record: StepRecord,
}

/// Shifts grid samples so index 0 lands on `a`.
fn rotate_samples(values: &[f64], a: usize) -> Vec<f64> {
    let g = values.len();
    (0..g).map(|k| values[(k + g - a % g) % g]).collect()
}

/// Zero run of `values` around index `a`: `(left, right)` counts such that
/// every index in `a-left ..= a+right` is at most `tau` in modulus.
fn zero_run_at(values: &[f64], a: usize, tau: f64) -> Option<(usize, usize)> {
    let g = values.len();
    if values[a].abs() > tau {
        return None;
    }
    let mut right = 0;
    while right + 1 < g && values[(a + right + 1) % g].abs() <= tau {
        right += 1;
    }
    let mut left = 0;
    while left + right + 1 < g && values[(a + g - left - 1) % g].abs() <= tau {
        left += 1;
    }
    Some((left, right))
}

/// One deletion step at grid point `a` with a prebuilt localizer.
pub fn deletion_step(
    p: &PairState,
    a: usize,
    loc: &Localizer,
    w: &WeightSequence,
    renormalize: bool,
    tol: &Tolerances,
) -> Result<StepOutcome> {
    let size = p.grid();
    if loc.grid != size {
        return Err(Error::InvalidParameter(format!(
            "localizer grid {} differs from pair grid {size}",
            loc.grid
        )));
    }
    let psi = rotate_samples(&loc.samples(), a);
    let raw: Vec<f64> = p.samples.iter().zip(&psi).map(|(f, s)| f * s).collect();
    let mean_before = p.f.get(0).re;
    let raw_mean = raw.iter().copied().collect::<CompensatedSum>().value() / size as f64;
    let c = if renormalize && raw_mean != 0.0 && mean_before != 0.0 {
        mean_before / raw_mean
    } else {
        1.0
    };
    let samples: Vec<f64> = raw.iter().map(|v| c * v).collect();
    let f_new = interpolate_real(&samples);

    // Exact product of the two interpolants versus the grid product.
    let psi_coeffs = loc.psi.rotated(std::f64::consts::TAU * a as f64 / size as f64);
    let exact = fourier::pointwise_product(&p.f, &psi_coeffs).scaled(c);
    let projection_norm = fourier::weighted_distance(&exact, &f_new, w)?;

    let l2_increment = fourier::weighted_distance(&f_new, &p.f, w)?;

    let scale = samples.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let thresh = tol.tau_supp * ARC_SAFETY / scale;
    let (left, right) = zero_run_at(&psi, a, thresh).ok_or_else(|| Error::LocalizerFailed {
        epsilon: loc.params.epsilon,
        reason: format!("no grid point of the deleted arc at {a} is below {thresh}"),
    })?;
    let arc_start = (a + size - left - 1) % size;
    let arc_len = (left + right + 2).min(size);
    let e_new = p.e.remove_open_arc(arc_start, arc_len);
    let hausdorff_increment = if e_new.is_empty() {
        f64::INFINITY
    } else {
        hausdorff_distance(&p.e, &e_new)?
    };

    let f_min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let f_max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let state = PairState {
        f: f_new,
        samples,
        e: e_new,
        budget_spent: p.budget_spent,
    };
    let mean = state.f.get(0).re;
    Ok(StepOutcome {
        record: StepRecord {
            step: 0,
            point: a,
            theta: std::f64::consts::TAU * a as f64 / size as f64,
            epsilon: loc.params.epsilon,
            halvings: 0,
            l2_increment,
            projection_norm,
            hausdorff_increment,
            charge: hausdorff_increment + l2_increment + projection_norm,
            allowance: f64::INFINITY,
            arc_start,
            arc_len,
            arc_length: arc_len as f64 / size as f64,
            mass_factor: c,
            f_min,
            f_max,
            mean,
        },
        state,
    })
}

/// Localizers by epsilon, built on demand.
pub struct LocalizerCache<'a> {
    w: &'a WeightSequence,
    opts: LocalizerOptions,
    tol: Tolerances,
    built: BTreeMap<u64, std::result::Result<Localizer, String>>,
}

impl<'a> LocalizerCache<'a> {
    pub fn new(w: &'a WeightSequence, opts: LocalizerOptions, tol: Tolerances) -> Self {
        Self {
            w,
            opts,
            tol,
            built: BTreeMap::new(),
        }
    }

    pub fn get(&mut self, eps: f64) -> std::result::Result<&Localizer, String> {
        let (w, opts, tol) = (self.w, self.opts, self.tol);
        self.built
            .entry(eps.to_bits())
            .or_insert_with(|| build_localizer(w, eps, &opts, &tol).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| e.clone())
    }
}

/// Output of a run: the final pair, the trace, and optional snapshots
/// (initial pair first).
pub struct BaireRun {
    pub state: PairState,
    pub trace: DeletionTrace,
    pub snapshots: Vec<PairState>,
}

/// Checks `0 <= f <= 2` on the grid to `tau`.
fn check_range(samples: &[f64], tau: f64) -> Result<()> {
    for &v in samples {
        if v < -tau {
            return Err(Error::RangeViolation { value: v, limit: -tau });
        }
        if v > 2.0 + tau {
            return Err(Error::RangeViolation { value: v, limit: 2.0 + tau });
        }
    }
    Ok(())
}

/// Runs the deletion step at each point in turn, halving epsilon until the
/// step fits its allowance, keeps `0 <= f <= 2`, and leaves every earlier
/// deleted arc numerically zero.
pub fn run_baire(
    f0: &CoeffVector,
    e0: CompactSet,
    points: &[usize],
    budgets: &[f64],
    w: &WeightSequence,
    opts: &BaireOptions,
    tol: &Tolerances,
) -> Result<BaireRun> {
    let size = e0.grid();
    fourier::check_grid(size)?;
    if opts.localizer.grid != size {
        return Err(Error::InvalidParameter(format!(
            "localizer grid {} differs from the set grid {size}",
            opts.localizer.grid
        )));
    }
    if budgets.len() < points.len() || budgets.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::InvalidParameter("need one positive budget per point".into()));
    }
    if e0.is_empty() {
        return Err(Error::EmptySet);
    }
    let prepared = prepare(f0, opts.prepare_delta, opts.fejer_order.unwrap_or(size / 4));
    let mut state = PairState::new(&prepared, e0)?;
    check_range(&state.samples, tol.tau_range)?;
    let initial_mean = state.f.get(0).re;

    let mut cache = LocalizerCache::new(w, opts.localizer, *tol);
    let mut snapshots = Vec::new();
    if opts.keep_snapshots {
        snapshots.push(state.clone());
    }
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut rejected: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut deleted: Vec<(usize, usize)> = Vec::new();
    let mut granted = 0.0;
    let mut nested = true;

    for (k, &a) in points.iter().enumerate() {
        let a = a % size;
        granted += budgets[k];
        let allowance = if opts.carry_forward {
            granted - state.budget_spent
        } else {
            budgets[k]
        };
        let mut eps = opts.eps_init;
        let mut accepted = None;
        let mut last_charge = f64::INFINITY;
        for halving in 0..=opts.max_halvings {
            let reason = match cache.get(eps) {
                Err(e) => Some(e),
                Ok(loc) => match deletion_step(&state, a, loc, w, opts.renormalize, tol) {
                    Err(e) => Some(e.to_string()),
                    Ok(out) => {
                        last_charge = out.record.charge;
                        let masked = deleted.iter().all(|&(s, l)| {
                            (1..l).all(|i| out.state.samples[(s + i) % size].abs() <= tol.tau_supp)
                        });
                        if out.record.charge > allowance {
                            Some(format!("charge {} exceeds allowance {allowance}", out.record.charge))
                        } else if out.record.f_max > 2.0 + tol.tau_range || out.record.f_min < -tol.tau_range {
                            Some(format!(
                                "range [{}, {}] leaves [0, 2]",
                                out.record.f_min, out.record.f_max
                            ))
                        } else if !masked {
                            Some("an earlier deleted arc left the support mask".into())
                        } else {
                            accepted = Some((halving, out));
                            None
                        }
                    }
                },
            };
            if let Some(r) = reason {
                rejected.entry(k).or_default().push(format!("eps={eps}: {r}"));
                eps *= 0.5;
            } else {
                break;
            }
        }
        let Some((halvings, mut out)) = accepted else {
            return Err(Error::EpsilonSearchExhausted {
                step: k,
                halvings: opts.max_halvings,
                charge: last_charge,
                allowance,
            });
        };
        out.record.step = k;
        out.record.halvings = halvings;
        out.record.allowance = allowance;
        out.state.budget_spent = state.budget_spent + out.record.charge;
        nested &= out.state.e.is_subset(&state.e);
        deleted.push((out.record.arc_start, out.record.arc_len));
        steps.push(out.record);
        state = out.state;
        if opts.keep_snapshots {
            snapshots.push(state.clone());
        }
    }

    let support = support_of_samples(&state.samples, tol.tau_supp);
    let arcs_avoided = deleted
        .iter()
        .all(|&(s, l)| (1..l).all(|i| !support.contains_point((s + i) % size) && !state.e.contains_point((s + i) % size)));
    let trace = DeletionTrace {
        grid: size,
        budgets: budgets[..points.len()].to_vec(),
        budget_total: budgets[..points.len()].iter().sum(),
        total_charged: state.budget_spent,
        initial_mean,
        final_mean: state.f.get(0).re,
        final_weighted_norm: fourier::weighted_norm(&state.f, w)?.value,
        final_min: state.samples.iter().copied().fold(f64::INFINITY, f64::min),
        final_max: state.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        nested,
        arcs_avoided,
        final_support: support.index_pairs(),
        final_e: state.e.index_pairs(),
        rejected,
        steps,
    };
    Ok(BaireRun {
        state,
        trace,
        snapshots,
    })
}

/// `K` equally spaced grid points starting at 0.
pub fn equally_spaced(size: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| i * size / k.max(1)).collect()
}

/// `b_k = first * ratio^k`, `k = 0..count`.
pub fn geometric_budgets(first: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| first * ratio.powi(k as i32)).collect()
}
