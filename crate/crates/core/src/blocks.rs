//! Building blocks `g_{eta,M,S}`: real, mean-zero polynomials equal to 1 on
//! an arc around `theta = 0`, bounded below by `-1/S`, with two-sided
//! polynomial decay of the coefficients at scale `eta`.
//!
//! Construction. Let `Phi` be the C-infinity plateau (1 on `|x| <= 1`, 0 on
//! `|x| >= 2`) and `T_R f(x) = f(x/R)/R`. The profile
//!
//! ```text
//! u = prod_{k<L} (I - R_k^{-2k} T_{R_k}) Phi(./delta),   L = ceil(M/2),
//! ```
//!
//! has vanishing moments of orders `0..2L-1`, hence `|u^(xi)| = O(xi^{2L})`
//! near the origin, and equals `c0 = prod (1 - R_k^{-2k-1})` on `|x| <= delta`.
//! Its negative part is bounded by the odd-subset sum of `q_k = R_k^{-2k-1}`,
//! which the radii are chosen to push to `-0.999/S` after normalizing by `c0`.
//! The block is `u(theta/eta)/c0` sampled on the grid and interpolated.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fourier::{self, CoeffVector, GridFunction};

/// Fraction of `-1/S` the radii aim for, leaving room for rounding.
const FLOOR_MARGIN: f64 = 0.999;
/// Largest support half-width in `x = theta/eta` used by default.
const DEFAULT_HALF_WIDTH: f64 = 24.0;

fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// C-infinity plateau: 1 on `|x| <= 1`, 0 on `|x| >= 2`.
pub fn plateau(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 1.0 {
        1.0
    } else if ax >= 2.0 {
        0.0
    } else {
        smoothstep(2.0 - ax)
    }
}

/// Radii of the moment-killing product for a given `(M, S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockShape {
    pub m: u32,
    pub s: u32,
    pub radii: Vec<f64>,
}

fn odd_subset_sum(q: &[f64]) -> f64 {
    let l = q.len();
    (1u32..1 << l)
        .filter(|mask| mask.count_ones() % 2 == 1)
        .map(|mask| (0..l).filter(|i| mask >> i & 1 == 1).map(|i| q[i]).product::<f64>())
        .sum()
}

impl BlockShape {
    pub fn new(m: u32, s: u32) -> Result<Self> {
        if m == 0 || s == 0 {
            return Err(Error::InvalidParameter(format!("block needs M, S >= 1 (got {m}, {s})")));
        }
        let l = m.div_ceil(2) as usize;
        let target = FLOOR_MARGIN / s as f64;
        if l == 1 {
            // -q/(1-q) = -target
            let q0 = target / (1.0 + target);
            return Ok(Self { m, s, radii: vec![1.0 / q0] });
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        // The inner radii only need q_1 = r^-3 well below the target.
        let r_max = 12f64.max(4.0 * (s as f64).cbrt());
        for step in 0..=200 {
            let r = 2.0 + (r_max - 2.0) * step as f64 / 200.0;
            let rest: Vec<f64> = (1..l).map(|k| r.powi(-(2 * k as i32 + 1))).collect();
            let floor = |q0: f64| {
                let mut q = vec![q0];
                q.extend_from_slice(&rest);
                odd_subset_sum(&q) / q.iter().map(|x| 1.0 - x).product::<f64>()
            };
            let (mut lo, mut hi) = (1e-12, 0.5);
            if floor(lo) > target {
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if floor(mid) <= target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut radii = vec![1.0 / lo];
            radii.extend(std::iter::repeat_n(r, l - 1));
            let prod: f64 = radii.iter().product();
            if best.as_ref().is_none_or(|b| prod < b.0) {
                best = Some((prod, radii));
            }
        }
        let (_, radii) = best.ok_or_else(|| Error::BlockRejected {
            eta: f64::NAN,
            m,
            s,
            reason: "no radii reach the floor target".into(),
        })?;
        Ok(Self { m, s, radii })
    }

    /// Support half-width of the profile in units of `delta`.
    pub fn support_factor(&self) -> f64 {
        2.0 * self.radii.iter().product::<f64>()
    }

    /// Value of the unnormalized profile on its plateau.
    pub fn plateau_value(&self) -> f64 {
        self.radii
            .iter()
            .enumerate()
            .map(|(k, r)| 1.0 - r.powi(-(2 * k as i32 + 1)))
            .product()
    }

    /// Analytic lower bound of the normalized profile.
    pub fn floor_bound(&self) -> f64 {
        let q: Vec<f64> = self
            .radii
            .iter()
            .enumerate()
            .map(|(k, r)| r.powi(-(2 * k as i32 + 1)))
            .collect();
        -odd_subset_sum(&q) / self.plateau_value()
    }

    /// `(Phi(x/delta), u(x) - Phi(x/delta))`.
    fn split(&self, x: f64, delta: f64) -> (f64, f64) {
        let base = plateau(x / delta);
        let l = self.radii.len();
        let mut rest = 0.0;
        for mask in 1u32..1 << l {
            let mut coef = 1.0;
            let mut r = 1.0;
            for (k, rk) in self.radii.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    coef *= -rk.powi(-2 * k as i32);
                    r *= rk;
                }
            }
            rest += coef * plateau(x / (r * delta)) / r;
        }
        (base, rest)
    }

    /// Grid samples of the normalized block at scale `eta` with plateau
    /// half-width `delta` (in `x = theta/eta`).
    ///
    /// The correction `kappa` rescales the subtracted copies so the sampled
    /// mean vanishes; exact sampling would give `kappa = 1`. The result is
    /// then renormalized to equal 1 on the plateau.
    pub fn sample(&self, eta: f64, delta: f64, size: usize) -> Result<(Vec<f64>, f64)> {
        fourier::check_grid(size)?;
        let reach = self.support_factor() * delta * eta;
        if reach >= PI {
            return Err(Error::InvalidParameter(format!(
                "block support {reach} exceeds the half circle (eta={eta}, delta={delta})"
            )));
        }
        let mut base = vec![0.0; size];
        let mut rest = vec![0.0; size];
        for k in 0..size {
            let mut theta = GridFunction::theta(k, size);
            if theta > PI {
                theta -= 2.0 * PI;
            }
            if theta.abs() < reach {
                (base[k], rest[k]) = self.split(theta / eta, delta);
            }
        }
        let sb: f64 = base.iter().sum();
        let sr: f64 = rest.iter().sum();
        let kappa = if sr != 0.0 { -sb / sr } else { 1.0 };
        let flat = 1.0 + kappa * (self.plateau_value() - 1.0);
        let samples = base.iter().zip(&rest).map(|(b, r)| (b + kappa * r) / flat).collect();
        Ok((samples, kappa))
    }
}

/// A built block with the parameters it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub eta: f64,
    pub m: u32,
    pub s: u32,
    pub grid: usize,
    /// Plateau half-width in `x = theta/eta`.
    pub delta: f64,
    pub radii: Vec<f64>,
    pub kappa: f64,
    pub poly: CoeffVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub eta: f64,
    pub m: u32,
    pub s: u32,
    pub grid: usize,
    pub flat_radius_meas: f64,
    pub floor_meas: f64,
    pub max_meas: f64,
    pub a_meas: f64,
    /// Frequency attaining `a_meas`.
    pub a_argmax: i64,
    pub mean_exact: bool,
    pub symmetry_defect: f64,
    pub tau_flat: f64,
    pub tau_floor: f64,
    pub delta_min: f64,
    pub a_max: f64,
    pub accepted: bool,
    pub failures: Vec<String>,
}

fn default_delta(shape: &BlockShape, eta: f64) -> f64 {
    DEFAULT_HALF_WIDTH.min(0.95 * PI / eta) / shape.support_factor()
}

/// Builds `g_{eta,M,S}` on a `G`-grid, doubling `G` up to three times on rejection.
pub fn build_block(eta: f64, m: u32, s: u32, size: usize, tol: &Tolerances) -> Result<(Block, BlockReport)> {
    let shape = BlockShape::new(m, s)?;
    let delta = default_delta(&shape, eta);
    let mut grid = size;
    let mut last = None;
    for _ in 0..4 {
        let block = build_block_with(&shape, eta, delta, grid)?;
        let report = verify_block(&block, tol);
        if report.accepted {
            return Ok((block, report));
        }
        last = Some(report);
        grid *= 2;
    }
    let report = last.expect("at least one attempt");
    Err(Error::BlockRejected {
        eta,
        m,
        s,
        reason: format!("{} (last grid {})", report.failures.join("; "), report.grid),
    })
}

/// Builds the block with an explicit plateau half-width, without retries.
pub fn build_block_with(shape: &BlockShape, eta: f64, delta: f64, size: usize) -> Result<Block> {
    if !(eta > 0.0 && eta < 0.5) {
        return Err(Error::InvalidParameter(format!("eta must lie in (0, 1/2), got {eta}")));
    }
    if (size as f64) < 64.0 / eta {
        return Err(Error::InvalidParameter(format!(
            "grid {size} does not resolve eta = {eta} (need G >= 64/eta)"
        )));
    }
    let (samples, kappa) = shape.sample(eta, delta, size)?;
    let grid = GridFunction::new(samples.iter().map(|v| Complex64::new(*v, 0.0)).collect())?;
    let mut poly = fourier::interpolate(&grid).real_part();
    poly.set(0, Complex64::new(0.0, 0.0));
    Ok(Block {
        eta,
        m: shape.m,
        s: shape.s,
        grid: size,
        delta,
        radii: shape.radii.clone(),
        kappa,
        poly,
    })
}

/// Measures the four block properties on the block's grid.
pub fn verify_block(b: &Block, tol: &Tolerances) -> BlockReport {
    let size = b.grid.max((2 * b.poly.degree()).next_power_of_two()).max(1);
    let values = fourier::evaluate_on_grid(&b.poly, size)
        .map(|g| g.real())
        .unwrap_or_default();
    let step = 2.0 * PI / size as f64;

    let mut k = 0usize;
    let flat = |i: usize| (values[i] - 1.0).abs() <= tol.tau_flat;
    let flat_radius_meas = if !values.is_empty() && flat(0) {
        while k + 1 < size / 2 && flat(k + 1) && flat(size - k - 1) {
            k += 1;
        }
        k as f64 * step
    } else {
        0.0
    };
    let floor_meas = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max_meas = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mf = b.m as i32;
    let (mut a_meas, mut a_argmax) = (0.0f64, 0i64);
    for (n, c) in b.poly.iter() {
        if n == 0 {
            continue;
        }
        let t = b.eta * n.unsigned_abs() as f64;
        let env = b.eta * t.powi(mf).min(t.powi(-mf));
        let ratio = c.norm() / env;
        if ratio > a_meas {
            a_meas = ratio;
            a_argmax = n;
        }
    }

    let s = b.s as f64;
    let mean_exact = b.poly.get(0) == Complex64::new(0.0, 0.0);
    let mut failures = Vec::new();
    if flat_radius_meas < tol.delta_min * b.eta || flat_radius_meas == 0.0 {
        failures.push(format!(
            "flatness (i): radius {flat_radius_meas} below delta_min*eta = {}",
            tol.delta_min * b.eta
        ));
    }
    if floor_meas < -1.0 / s - tol.tau_floor {
        failures.push(format!("floor (ii): min {floor_meas} below -1/S - tau_floor"));
    }
    if !mean_exact {
        failures.push("mean (iii): coefficient at 0 is not exactly 0".into());
    }
    if !(a_meas.is_finite() && a_meas < tol.a_max) {
        failures.push(format!("envelope (iv): A_meas {a_meas} not below A_max {}", tol.a_max));
    }
    BlockReport {
        eta: b.eta,
        m: b.m,
        s: b.s,
        grid: size,
        flat_radius_meas,
        floor_meas,
        max_meas,
        a_meas,
        a_argmax,
        mean_exact,
        symmetry_defect: b.poly.symmetry_defect(),
        tau_flat: tol.tau_flat,
        tau_floor: tol.tau_floor,
        delta_min: tol.delta_min,
        a_max: tol.a_max,
        accepted: failures.is_empty(),
        failures,
    }
}

/// One sweep cell; `report` is `Err` with the rejection message.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub eta: f64,
    pub m: u32,
    pub s: u32,
    pub report: std::result::Result<BlockReport, String>,
}

/// Builds and verifies every `(eta, M, S)` combination, in parallel, in a
/// fixed output order.
pub fn sweep(etas: &[f64], ms: &[u32], ss: &[u32], size: usize, tol: &Tolerances) -> Vec<SweepEntry> {
    let cells: Vec<(f64, u32, u32)> = ms
        .iter()
        .flat_map(|&m| ss.iter().flat_map(move |&s| etas.iter().map(move |&e| (e, m, s))))
        .collect();
    cells
        .into_par_iter()
        .map(|(eta, m, s)| SweepEntry {
            eta,
            m,
            s,
            report: build_block(eta, m, s, size, tol)
                .map(|(_, r)| r)
                .map_err(|e| e.to_string()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_is_smooth_step() {
        assert_eq!(plateau(0.5), 1.0);
        assert_eq!(plateau(-2.5), 0.0);
        assert!((plateau(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn floor_bound_meets_target() {
        for m in 1..=4 {
            for s in [4, 8, 16] {
                let sh = BlockShape::new(m, s).unwrap();
                let f = sh.floor_bound();
                assert!(f >= -1.0 / s as f64, "{m} {s} {f}");
                assert!(f <= -0.99 / s as f64);
            }
        }
    }

    #[test]
    fn odd_subsets() {
        // q0 + q1 + q2 + q0 q1 q2
        let s = odd_subset_sum(&[0.1, 0.2, 0.3]);
        assert!((s - (0.6 + 0.006)).abs() < 1e-15);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        let b = Block {
            eta: 0.1,
            m: 1,
            s: 4,
            grid: 64,
            delta: 0.0,
            radii: vec![],
            kappa: 1.0,
            poly: CoeffVector::zeros(4),
        };
        let r = verify_block(&b, &Tolerances::default());
        assert_eq!(r.floor_meas, 0.0);
        assert_eq!(r.flat_radius_meas, 0.0);
        assert!(!r.accepted);
    }

    #[test]
    fn small_block_is_accepted() {
        let (b, r) = build_block(1.0 / 16.0, 1, 4, 4096, &Tolerances::default()).unwrap();
        assert!(r.accepted, "{:?}", r.failures);
        assert_eq!(b.poly.get(0).re.to_bits(), 0);
        assert!((b.kappa - 1.0).abs() < 1e-3);
    }
}
