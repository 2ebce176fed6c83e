//! Discrete Fourier analysis on the circle.
//!
//! Coefficients use the normalized measure `dm = dtheta / 2pi`, so `c_0` is
//! the mean. Grids are powers of two and the quadrature weight is `1/G`.

mod coeff;
pub mod fft;
mod grid;
pub mod io;

pub use coeff::CoeffVector;
pub use grid::GridFunction;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::weights::WeightSequence;
use fft::Direction;
pub(crate) use grid::check_grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients `c_n`, `|n| <= degree`, of the trigonometric interpolant of
/// the samples. The default degree is `G/2 - 1`.
pub fn dft(g: &GridFunction, degree: Option<usize>) -> Result<CoeffVector> {
    let size = g.size();
    let degree = degree.unwrap_or((size / 2).saturating_sub(1));
    if size < 2 * degree + 1 {
        return Err(Error::NyquistBound {
            degree,
            grid: size,
            needed: 2 * degree + 1,
        });
    }
    let x = forward(g);
    Ok(CoeffVector::from_fn(degree, |n| x[n.rem_euclid(size as i64) as usize]))
}

/// The full interpolant of degree `G/2`, with the Nyquist term split evenly
/// between `n = G/2` and `n = -G/2`. Evaluating it back on the same grid
/// reproduces the samples exactly (up to rounding) for arbitrary input.
pub fn interpolate(g: &GridFunction) -> CoeffVector {
    let size = g.size();
    let x = forward(g);
    if size == 1 {
        return CoeffVector::from_coeffs(vec![x[0]]).expect("length one");
    }
    let h = (size / 2) as i64;
    CoeffVector::from_fn(h as usize, |n| {
        if n.abs() == h {
            x[h as usize] * 0.5
        } else {
            x[n.rem_euclid(size as i64) as usize]
        }
    })
}

fn forward(g: &GridFunction) -> Vec<Complex64> {
    let size = g.size();
    let mut buf = g.samples().to_vec();
    fft::transform(&mut buf, Direction::Forward);
    let inv = 1.0 / size as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    buf
}

/// Samples of the polynomial on a `G`-grid. Requires `G >= 2N + 2` so the
/// grid resolves every stored frequency.
pub fn idft(c: &CoeffVector, size: usize) -> Result<GridFunction> {
    check_grid(size)?;
    let needed = 2 * c.degree() + 2;
    if size < needed {
        return Err(Error::NyquistBound {
            degree: c.degree(),
            grid: size,
            needed,
        });
    }
    evaluate_on_grid(c, size)
}

/// Exact grid values of the polynomial for any degree: frequencies are folded
/// modulo `G` before the inverse transform.
pub fn evaluate_on_grid(c: &CoeffVector, size: usize) -> Result<GridFunction> {
    check_grid(size)?;
    let mut buf = vec![ZERO; size];
    for (n, v) in c.iter() {
        buf[n.rem_euclid(size as i64) as usize] += v;
    }
    fft::transform(&mut buf, Direction::Inverse);
    GridFunction::new(buf)
}

/// Product on the circle, i.e. the coefficient convolution
/// `sum_m f(m) g(n - m)`, of degree `N_f + N_g`.
pub fn pointwise_product(f: &CoeffVector, g: &CoeffVector) -> CoeffVector {
    let work = f.coeffs().len() * g.coeffs().len();
    if work <= 1 << 14 {
        convolve_direct(f, g)
    } else {
        convolve_fft(f, g)
    }
}

pub(crate) fn convolve_direct(f: &CoeffVector, g: &CoeffVector) -> CoeffVector {
    let mut out = CoeffVector::zeros(f.degree() + g.degree());
    let (a, b) = (f.coeffs(), g.coeffs());
    let dst = out.coeffs_mut();
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            dst[i + j] += x * y;
        }
    }
    out
}

pub(crate) fn convolve_fft(f: &CoeffVector, g: &CoeffVector) -> CoeffVector {
    let len = f.coeffs().len() + g.coeffs().len() - 1;
    let size = len.next_power_of_two();
    let mut a = vec![ZERO; size];
    let mut b = vec![ZERO; size];
    a[..f.coeffs().len()].copy_from_slice(f.coeffs());
    b[..g.coeffs().len()].copy_from_slice(g.coeffs());
    fft::transform(&mut a, Direction::Forward);
    fft::transform(&mut b, Direction::Forward);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft::transform(&mut a, Direction::Inverse);
    let inv = 1.0 / size as f64;
    a.truncate(len);
    a.iter_mut().for_each(|z| *z *= inv);
    CoeffVector::from_coeffs(a).expect("odd length by construction")
}

/// Fejer mean of order `k`: `c_n -> c_n max(0, 1 - |n|/(k+1))`.
pub fn fejer_mean(f: &CoeffVector, k: usize) -> CoeffVector {
    let degree = f.degree().min(k);
    let denom = (k + 1) as f64;
    CoeffVector::from_fn(degree, |n| {
        f.get(n) * (1.0 - n.unsigned_abs() as f64 / denom).max(0.0)
    })
}

/// `||f||_{l2(w)}` together with its running sums over `|n| <= k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormReport {
    pub value: f64,
    pub partial_sums: Vec<f64>,
}

/// `(sum_{|n|<=N} |c_n|^2 w_|n|)^(1/2)` with the partial-sum trace.
pub fn weighted_norm(f: &CoeffVector, w: &WeightSequence) -> Result<WeightedNormReport> {
    let table = w.table(f.degree())?;
    let mut acc = CompensatedSum::new();
    let mut partial_sums = Vec::with_capacity(f.degree() + 1);
    for k in 0..=f.degree() as i64 {
        let mass = if k == 0 {
            f.get(0).norm_sqr()
        } else {
            f.get(k).norm_sqr() + f.get(-k).norm_sqr()
        };
        acc.add(mass * table[k as usize]);
        partial_sums.push(acc.value());
    }
    Ok(WeightedNormReport {
        value: acc.value().max(0.0).sqrt(),
        partial_sums,
    })
}

/// `||f - g||_{l2(w)}` without materializing the difference trace.
pub fn weighted_distance(f: &CoeffVector, g: &CoeffVector, w: &WeightSequence) -> Result<f64> {
    let degree = f.degree().max(g.degree());
    let table = w.table(degree)?;
    let mut acc = CompensatedSum::new();
    for n in -(degree as i64)..=degree as i64 {
        acc.add((f.get(n) - g.get(n)).norm_sqr() * table[n.unsigned_abs() as usize]);
    }
    Ok(acc.value().max(0.0).sqrt())
}

/// Cauchy-Schwarz bound `||f||_{l2(w)} (sum_{|n|<=N} 1/w_|n|)^(1/2)` on the
/// l1 norm of the coefficients.
pub fn wiener_bound(f: &CoeffVector, w: &WeightSequence) -> Result<f64> {
    let norm = weighted_norm(f, w)?.value;
    let table = w.table(f.degree())?;
    let mut inv = CompensatedSum::new();
    inv.add(1.0 / table[0]);
    for v in &table[1..=f.degree()] {
        inv.add(2.0 / v);
    }
    Ok(norm * inv.value().sqrt())
}
