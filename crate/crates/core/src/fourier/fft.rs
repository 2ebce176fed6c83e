//! Iterative radix-2 Cooley-Tukey transform.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Sign convention of the exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = sum_j x_j exp(-2 pi i jk / G)`
    Forward,
    /// `x_j = sum_k X_k exp(+2 pi i jk / G)` (unnormalized)
    Inverse,
}

fn bit_reverse_permute(buf: &mut [Complex64]) {
    let n = buf.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
}

/// In-place unnormalized transform. `buf.len()` must be a power of two.
pub fn transform(buf: &mut [Complex64], dir: Direction) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n <= 1 {
        return;
    }
    bit_reverse_permute(buf);

    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    // Twiddles computed directly (not by recurrence) to keep the error at one ulp.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
            Complex64::new(c, sign * s)
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64], dir: Direction) -> Vec<Complex64> {
        let n = x.len();
        let sign = if dir == Direction::Forward { -1.0 } else { 1.0 };
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let ang = sign * 2.0 * PI * (j * k % n) as f64 / n as f64;
                        v * Complex64::from_polar(1.0, ang)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 4, 8, 32, 64] {
            let x: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
                .collect();
            for dir in [Direction::Forward, Direction::Inverse] {
                let mut fast = x.clone();
                transform(&mut fast, dir);
                let slow = naive(&x, dir);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).norm() < 1e-12 * n as f64, "n={n}");
                }
            }
        }
    }

    #[test]
    fn forward_then_inverse_scales_by_length() {
        let n = 256;
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let mut y = x.clone();
        transform(&mut y, Direction::Forward);
        transform(&mut y, Direction::Inverse);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b / n as f64).norm() < 1e-10);
        }
    }
}
