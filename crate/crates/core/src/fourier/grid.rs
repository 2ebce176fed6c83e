use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Samples at `theta_k = 2 pi k / G`, `k = 0..G`. `G` is a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    samples: Vec<Complex64>,
}

pub(crate) fn check_grid(size: usize) -> Result<()> {
    if size == 0 || !size.is_power_of_two() {
        return Err(Error::GridNotPowerOfTwo(size));
    }
    Ok(())
}

impl GridFunction {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        check_grid(samples.len())?;
        Ok(Self { samples })
    }

    pub fn from_fn(size: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_grid(size)?;
        Ok(Self {
            samples: (0..size).map(|k| f(Self::theta(k, size))).collect(),
        })
    }

    pub fn from_real(size: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(size, |t| Complex64::new(f(t), 0.0))
    }

    /// `2 pi k / size`.
    pub fn theta(k: usize, size: usize) -> f64 {
        TAU * k as f64 / size as f64
    }

    pub fn size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn real(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_re(&self) -> f64 {
        self.samples.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_re(&self) -> f64 {
        self.samples.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// Quadrature L2 norm with weight 1/G per sample.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        (s / self.size() as f64).sqrt()
    }

    /// Pointwise product of two grids of equal size.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.size() != other.size() {
            return Err(Error::InvalidParameter(format!(
                "grid sizes differ: {} vs {}",
                self.size(),
                other.size()
            )));
        }
        Ok(Self {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    /// Cyclic shift: the result at `k` is `self[k - shift]`.
    pub fn shifted(&self, shift: usize) -> Self {
        let g = self.size();
        let s = shift % g;
        let mut out = Vec::with_capacity(g);
        out.extend_from_slice(&self.samples[g - s..]);
        out.extend_from_slice(&self.samples[..g - s]);
        Self { samples: out }
    }
}
