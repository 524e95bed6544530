//! Discrete Fourier transforms on a periodic grid x ∈ [−L, L).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Forward/inverse DFT plans together with the angular wavenumbers
/// μ_m = π m / L in FFT order.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Wavenumber of each DFT bin (the Nyquist bin of an even-length grid
    /// carries +π n/(2L)).
    pub mu: Vec<f64>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    /// Plans for `n` samples over a period of length 2L.
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 2 || !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidArgument(format!("Fourier grid needs n >= 2 and L > 0 (n = {n}, L = {l})")));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let dk = std::f64::consts::PI / l;
        let mu = (0..n)
            .map(|m| {
                let s = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                s * dk
            })
            .collect();
        Ok(Self { n, fwd, inv, mu })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false (at least two samples).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut buf = data.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform including the 1/n normalization.
    pub fn inverse(&self, data: &[Complex64]) -> Vec<Complex64> {
        let mut buf = data.to_vec();
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= s);
        buf
    }

    /// Apply the Fourier multiplier `symbol(μ)`.
    pub fn multiply<F: Fn(f64) -> Complex64>(&self, data: &[Complex64], symbol: F) -> Vec<Complex64> {
        let mut hat = self.forward(data);
        hat.iter_mut().zip(&self.mu).for_each(|(h, &m)| *h *= symbol(m));
        self.inverse(&hat)
    }

    /// Spectral derivative d/dx; the Nyquist bin of an even grid is zeroed
    /// so that real data stays real.
    pub fn dx(&self, data: &[Complex64]) -> Vec<Complex64> {
        let nyq = if self.n % 2 == 0 { Some(self.n / 2) } else { None };
        let mut hat = self.forward(data);
        for (m, h) in hat.iter_mut().enumerate() {
            *h *= if Some(m) == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, self.mu[m]) };
        }
        self.inverse(&hat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_trigonometric_polynomial() {
        let n = 64;
        let l = 3.0;
        let f = Fourier::new(n, l).unwrap();
        let h = 2.0 * l / n as f64;
        let k = std::f64::consts::PI / l * 5.0;
        let x: Vec<f64> = (0..n).map(|i| -l + i as f64 * h).collect();
        let u: Vec<Complex64> = x.iter().map(|&v| Complex64::new((k * v).sin(), 0.0)).collect();
        let du = f.dx(&u);
        for (d, &v) in du.iter().zip(&x) {
            assert!((d - Complex64::new(k * (k * v).cos(), 0.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let f = Fourier::new(30, 1.0).unwrap();
        let u: Vec<Complex64> = (0..30).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let back = f.inverse(&f.forward(&u));
        for (a, b) in back.iter().zip(&u) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
