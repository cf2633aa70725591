//! dt-weighted discrete Fourier transforms.
//!
//! Forward: `X(ω_k) = dt Σ x_n e^{-iω_k t_n}`; inverse carries `dω/2π`, so that
//! `dt Σ|x|² = (dω/2π) Σ|X|²` and spectral products approximate continuum ones.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Trace;
use crate::error::{invalid, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unnormalized forward FFT (`e^{-2πi jk/N}`).
pub(crate) fn fft(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// In-place unnormalized inverse FFT (`e^{+2πi jk/N}`, no 1/N).
pub(crate) fn ifft(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// Angular frequency of bin `k` on an `n`-point grid; the Nyquist bin maps to −π/dt.
pub fn bin_omega(k: usize, n: usize, dt: f64) -> f64 {
    let signed = if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    };
    2.0 * PI * signed / (n as f64 * dt)
}

/// Zero-pads `samples` to length `n` and returns the dt-weighted spectrum,
/// ignoring the trace start time.
pub(crate) fn forward_padded(samples: &[f64], n: usize, dt: f64) -> Vec<Complex64> {
    debug_assert!(n >= samples.len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (b, &s) in buf.iter_mut().zip(samples) {
        b.re = s;
    }
    fft(&mut buf);
    for b in buf.iter_mut() {
        *b *= dt;
    }
    buf
}

/// Inverse of [`forward_padded`]: real part of the circular inverse transform.
pub(crate) fn inverse_real(mut spec: Vec<Complex64>, dt: f64) -> Vec<f64> {
    let n = spec.len();
    ifft(&mut spec);
    let scale = 1.0 / (n as f64 * dt);
    spec.into_iter().map(|c| c.re * scale).collect()
}

/// Marker for the sign of the forward exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierSign {
    /// Forward transform uses `e^{-iωt}`.
    NegativeExponent,
}

/// Spectrum of a real trace on an `n`-point grid, phase-referenced to absolute time.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub coefficients: Vec<Complex64>,
    pub d_omega: f64,
    pub dt: f64,
    pub t0: f64,
    pub convention: FourierSign,
}

impl Spectrum {
    /// Transform of `x` zero-padded to `n ≥ x.len()` samples.
    pub fn of(x: &Trace, n: usize) -> Result<Spectrum> {
        if n < x.len() || n == 0 {
            return invalid(format!("transform length {n} shorter than trace length {}", x.len()));
        }
        let dt = x.dt();
        let mut coefficients = forward_padded(x.samples(), n, dt);
        for (k, c) in coefficients.iter_mut().enumerate() {
            let w = bin_omega(k, n, dt);
            *c *= Complex64::from_polar(1.0, -w * x.t0());
        }
        Ok(Spectrum {
            coefficients,
            d_omega: 2.0 * PI / (n as f64 * dt),
            dt,
            t0: x.t0(),
            convention: FourierSign::NegativeExponent,
        })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn omega(&self, k: usize) -> f64 {
        bin_omega(k, self.len(), self.dt)
    }

    /// `(dω/2π) Σ|X|²`, equal to the trace energy by Parseval.
    pub fn energy(&self) -> f64 {
        self.d_omega / (2.0 * PI) * self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Largest relative deviation from `X(−ω) = conj X(ω)`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.len();
        let scale = self
            .coefficients
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        (1..n)
            .map(|k| (self.coefficients[k] - self.coefficients[n - k].conj()).norm())
            .fold(0.0_f64, f64::max)
            / scale
    }

    /// Inverse transform back onto the `n`-sample axis starting at `t0`.
    pub fn to_trace(&self) -> Trace {
        let spec: Vec<Complex64> = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, &c)| c * Complex64::from_polar(1.0, self.omega(k) * self.t0))
            .collect();
        Trace::from_parts(inverse_real(spec, self.dt), self.dt, self.t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_frequencies_are_signed() {
        let dt = 0.5;
        assert_eq!(bin_omega(0, 8, dt), 0.0);
        assert!((bin_omega(1, 8, dt) - 2.0 * PI / 4.0).abs() < 1e-15);
        assert!(bin_omega(4, 8, dt) < 0.0);
        assert!(bin_omega(7, 8, dt) < 0.0);
        assert!(bin_omega(3, 7, dt) > 0.0);
        assert!(bin_omega(4, 7, dt) < 0.0);
    }

    #[test]
    fn round_trip_with_offset_start() {
        let x = Trace::from_fn(50, 0.01, -0.2, |t| (-(t * 10.0).powi(2)).exp()).unwrap();
        let s = Spectrum::of(&x, 64).unwrap();
        let y = s.to_trace();
        for i in 0..50 {
            assert!((x.samples()[i] - y.samples()[i]).abs() < 1e-13);
        }
        assert!((y.t0() + 0.2).abs() < 1e-15);
    }
}
