//! Convolution with a predicted trace as a circular operator on an odd FFT grid.
//!
//! Filters live on a symmetric lag axis `−K·dt … K·dt` with `N = 2K + 1`, so every
//! lag has a mirror and no Nyquist bin exists. Vectors passed to and from the
//! operator use lag order: index `i` is lag `(i − K)·dt`.

use num_complex::Complex64;

use crate::error::{invalid, AwiError, Result};
use crate::signal::{bin_omega, forward_padded, inverse_real, TimeAxis, Trace};

/// Smallest odd `3^a 5^b 7^c ≥ min`.
pub fn fft_size(min: usize) -> usize {
    let min = min.max(1);
    let mut best = usize::MAX;
    let mut p3 = 1usize;
    while p3 < best {
        let mut p35 = p3;
        while p35 < best {
            let mut p = p35;
            while p < min {
                p *= 7;
            }
            best = best.min(p);
            p35 = match p35.checked_mul(5) {
                Some(v) => v,
                None => break,
            };
        }
        p3 = match p3.checked_mul(3) {
            Some(v) => v,
            None => break,
        };
    }
    best
}

/// `u ↦ predicted * u` with the observed trace as the target, on an `N`-point circle.
#[derive(Debug, Clone)]
pub struct TraceOperator {
    n: usize,
    dt: f64,
    p_hat: Vec<Complex64>,
    target: Vec<f64>,
    target_hat: Vec<Complex64>,
}

impl TraceOperator {
    /// Builds the operator. Without `n`, the grid is the smallest admissible size
    /// holding both traces back to back, so no circular wrap reaches the data.
    pub fn new(predicted: &Trace, observed: &Trace, n: Option<usize>) -> Result<Self> {
        let dt = predicted.dt();
        if (observed.dt() - dt).abs() > 1e-12 * dt {
            return invalid(format!("dt mismatch: {} vs {}", dt, observed.dt()));
        }
        if predicted.is_zero() {
            return Err(AwiError::DegenerateOperator("predicted trace is identically zero".into()));
        }
        let offset = (observed.t0() - predicted.t0()) / dt;
        if (offset - offset.round()).abs() > 1e-6 {
            return invalid("predicted and observed start times differ by a non-integer number of samples");
        }
        let min = predicted.len() + observed.len();
        let n = match n {
            Some(n) if n % 2 == 1 && n >= min => n,
            Some(n) => {
                return invalid(format!("FFT length {n} must be odd and at least {min}"));
            }
            None => fft_size(min),
        };
        let m = offset.round() as i64;
        let mut target = vec![0.0; n];
        for (j, &v) in observed.samples().iter().enumerate() {
            target[(j as i64 + m).rem_euclid(n as i64) as usize] = v;
        }
        let p_hat = forward_padded(predicted.samples(), n, dt);
        let target_hat = forward_padded(&target, n, dt);
        Ok(TraceOperator { n, dt, p_hat, target, target_hat })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn lag_axis(&self) -> TimeAxis {
        TimeAxis { n: self.n, dt: self.dt, t0: -(self.half() as f64) * self.dt }
    }

    /// Lag of index `i` in lag order.
    pub fn lag(&self, i: usize) -> f64 {
        (i as f64 - self.half() as f64) * self.dt
    }

    pub fn p_hat(&self) -> &[Complex64] {
        &self.p_hat
    }

    pub fn omega(&self, k: usize) -> f64 {
        bin_omega(k, self.n, self.dt)
    }

    /// `max_ω |p̂(ω)|²`.
    pub fn peak_power(&self) -> f64 {
        self.p_hat.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max)
    }

    /// Mean of `|p̂|²` over bins, the diagonal of `SᵀS`.
    pub fn mean_power(&self) -> f64 {
        self.p_hat.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.n as f64
    }

    pub fn target_norm_sq(&self) -> f64 {
        self.dt * self.target.iter().map(|v| v * v).sum::<f64>()
    }

    fn to_circular(&self, lag: &[f64]) -> Vec<f64> {
        debug_assert_eq!(lag.len(), self.n);
        let k = self.half();
        let mut c = vec![0.0; self.n];
        for (i, &v) in lag.iter().enumerate() {
            c[(i + self.n - k) % self.n] = v;
        }
        c
    }

    fn to_lag(&self, circ: &[f64]) -> Vec<f64> {
        let k = self.half();
        (0..self.n).map(|i| circ[(i + self.n - k) % self.n]).collect()
    }

    fn lag_spectrum(&self, lag: &[f64]) -> Vec<Complex64> {
        forward_padded(&self.to_circular(lag), self.n, self.dt)
    }

    fn lag_from_spectrum(&self, spec: Vec<Complex64>) -> Vec<f64> {
        self.to_lag(&inverse_real(spec, self.dt))
    }

    /// `S u` on the circle, aligned with the target.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let spec = self.lag_spectrum(u).iter().zip(&self.p_hat).map(|(u, p)| u * p).collect();
        inverse_real(spec, self.dt)
    }

    /// `Sᵀ y` for `y` aligned with the target; returns lag order.
    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let spec = forward_padded(y, self.n, self.dt)
            .iter()
            .zip(&self.p_hat)
            .map(|(y, p)| y * p.conj())
            .collect();
        self.lag_from_spectrum(spec)
    }

    /// `Sᵀd`, the right-hand side of the normal equation.
    pub fn rhs(&self) -> Vec<f64> {
        self.lag_from_spectrum(
            self.target_hat.iter().zip(&self.p_hat).map(|(d, p)| d * p.conj()).collect(),
        )
    }

    /// `(SᵀS + σ)u`.
    pub fn normal(&self, u: &[f64], sigma: f64) -> Vec<f64> {
        let spec = self
            .lag_spectrum(u)
            .iter()
            .zip(&self.p_hat)
            .map(|(u, p)| u * (p.norm_sqr() + sigma))
            .collect();
        self.lag_from_spectrum(spec)
    }

    /// Applies `(|p̂|² + shift)⁻¹` in frequency.
    pub fn spectral_inverse(&self, r: &[f64], shift: f64) -> Vec<f64> {
        let spec = self
            .lag_spectrum(r)
            .iter()
            .zip(&self.p_hat)
            .map(|(r, p)| r / (p.norm_sqr() + shift))
            .collect();
        self.lag_from_spectrum(spec)
    }

    /// Minimizer of `‖Su − d‖² + σ‖u‖²` on the circle.
    pub fn solve(&self, sigma: f64) -> Vec<f64> {
        let spec = self
            .target_hat
            .iter()
            .zip(&self.p_hat)
            .map(|(d, p)| p.conj() * d / (p.norm_sqr() + sigma))
            .collect();
        self.lag_from_spectrum(spec)
    }

    /// `‖Su − d‖`.
    pub fn residual_norm(&self, u: &[f64]) -> f64 {
        let su = self.apply(u);
        (self.dt * su.iter().zip(&self.target).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sqrt()
    }

    /// `‖Su − d‖² + σ‖u‖²`.
    pub fn quadratic(&self, u: &[f64], sigma: f64) -> f64 {
        let unorm = self.dt * u.iter().map(|v| v * v).sum::<f64>();
        self.residual_norm(u).powi(2) + sigma * unorm
    }

    /// Wraps a lag-order vector as a trace on the lag axis.
    pub fn lag_trace(&self, u: Vec<f64>) -> Trace {
        Trace::from_parts(u, self.dt, -(self.half() as f64) * self.dt)
    }

    /// Embeds a filter trace (on a sub-window of the lag axis) into lag order.
    pub fn embed(&self, filter: &Trace) -> Result<Vec<f64>> {
        let first = filter.t0() / self.dt + self.half() as f64;
        if (first - first.round()).abs() > 1e-6 || first.round() < 0.0 {
            return invalid("filter lags are not on the operator's lag grid");
        }
        let first = first.round() as usize;
        if first + filter.len() > self.n {
            return invalid("filter extends beyond the operator's lag grid");
        }
        let mut u = vec![0.0; self.n];
        u[first..first + filter.len()].copy_from_slice(filter.samples());
        Ok(u)
    }
}
