use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Two-sided Fourier coefficients `c_n`, `-N <= n <= N`, under the
/// normalized measure (the constant function 1 has `c_0 = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffVector {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl CoeffVector {
    pub fn zeros(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * degree + 1],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self {
            degree: 0,
            coeffs: vec![Complex64::new(c, 0.0)],
        }
    }

    /// `c * zeta^n`.
    pub fn monomial(n: i64, c: Complex64) -> Self {
        let mut v = Self::zeros(n.unsigned_abs() as usize);
        v.set(n, c);
        v
    }

    /// Builds from an array laid out as `c_{-N}, ..., c_N`.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "coefficient array length {} is not of the form 2N+1",
                coeffs.len()
            )));
        }
        Ok(Self {
            degree: coeffs.len() / 2,
            coeffs,
        })
    }

    pub fn from_fn(degree: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let d = degree as i64;
        Self {
            degree,
            coeffs: (-d..=d).map(&mut f).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients in index order `-N..=N`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `c_n`, zero outside the stored range.
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.degree {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + self.degree as i64) as usize]
        }
    }

    /// Panics if `|n|` exceeds the degree.
    pub fn set(&mut self, n: i64, v: Complex64) {
        assert!(
            n.unsigned_abs() as usize <= self.degree,
            "index {n} outside degree {}",
            self.degree
        );
        let i = (n + self.degree as i64) as usize;
        self.coeffs[i] = v;
    }

    /// `(n, c_n)` pairs in ascending `n`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let d = self.degree as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - d, *c))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `c_{-n} = conj(c_n)` for all `n`, to `tol` relative to the largest coefficient.
    pub fn is_real_valued(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol * self.max_abs().max(1.0)
    }

    /// `max_n |c_{-n} - conj(c_n)|`.
    pub fn symmetry_defect(&self) -> f64 {
        (0..=self.degree as i64)
            .map(|n| (self.get(-n) - self.get(n).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Real part of the represented function.
    pub fn real_part(&self) -> Self {
        Self::from_fn(self.degree, |n| (self.get(n) + self.get(-n).conj()) * 0.5)
    }

    /// Drops coefficients with `|n| > degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        if degree >= self.degree {
            return self.padded(degree);
        }
        Self::from_fn(degree, |n| self.get(n))
    }

    /// Same function stored at a larger degree. No-op when `degree <= self.degree`.
    pub fn padded(&self, degree: usize) -> Self {
        if degree <= self.degree {
            return self.clone();
        }
        Self::from_fn(degree, |n| self.get(n))
    }

    /// `zeta -> f(zeta * conj(a))` with `a = exp(i theta)`: `c_n -> c_n exp(-i n theta)`.
    pub fn rotated(&self, theta: f64) -> Self {
        Self::from_fn(self.degree, |n| {
            self.get(n) * Complex64::from_polar(1.0, -(n as f64) * theta)
        })
    }

    /// `zeta^k f(zeta)`.
    pub fn modulated(&self, k: i64) -> Self {
        let degree = self.degree + k.unsigned_abs() as usize;
        Self::from_fn(degree, |n| self.get(n - k))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Unweighted l2 norm (the L2 norm of the function by Parseval).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sup_{n != 0} |c_n|`.
    pub fn sup_nonzero(&self) -> f64 {
        self.iter()
            .filter(|(n, _)| *n != 0)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let degree = self.degree.max(other.degree);
        Self::from_fn(degree, |n| op(self.get(n), other.get(n)))
    }
}

impl Default for CoeffVector {
    fn default() -> Self {
        Self::zeros(0)
    }
}

impl Add for &CoeffVector {
    type Output = CoeffVector;
    fn add(self, rhs: Self) -> CoeffVector {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &CoeffVector {
    type Output = CoeffVector;
    fn sub(self, rhs: Self) -> CoeffVector {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &CoeffVector {
    type Output = CoeffVector;
    fn mul(self, rhs: f64) -> CoeffVector {
        self.scaled(rhs)
    }
}
