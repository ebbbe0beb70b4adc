//! Discrete Fourier transform on Z/N with the normalization
//! `f^(r) = E_x f(x) e(-r x / N)` used throughout the crate.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// A planned normalized DFT of fixed length.
#[derive(Clone)]
pub struct Dft {
    n: usize,
    plan: Arc<dyn Fft<f64>>,
}

impl Dft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Dft {
            n,
            plan: planner.plan_fft_forward(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place transform; `buf.len()` must equal the planned length.
    pub fn transform(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.plan.process(buf);
        let scale = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.transform(&mut buf);
        buf
    }
}

pub fn dft(values: &[Complex64]) -> Vec<Complex64> {
    Dft::new(values.len()).forward(values)
}

/// `e(theta) = exp(2 pi i theta)`.
pub fn e(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * theta)
}

/// `e(a / n)` with the numerator reduced exactly first.
pub fn e_frac(a: i128, n: u64) -> Complex64 {
    let r = a.rem_euclid(n as i128);
    e(r as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum() {
        let n = 13usize;
        let f: Vec<Complex64> = (0..n)
            .map(|x| Complex64::new((x as f64).sin(), (x * x % 7) as f64 / 7.0))
            .collect();
        let fast = dft(&f);
        for r in 0..n {
            let naive: Complex64 = (0..n)
                .map(|x| f[x] * e_frac(-((r * x) as i128), n as u64))
                .sum::<Complex64>()
                / n as f64;
            assert!((naive - fast[r]).norm() < 1e-12);
        }
    }

    #[test]
    fn indicator_of_zero_is_flat() {
        let mut f = vec![Complex64::new(0.0, 0.0); 8];
        f[0] = Complex64::new(1.0, 0.0);
        for z in dft(&f) {
            assert!((z - Complex64::new(0.125, 0.0)).norm() < 1e-15);
        }
    }
}
