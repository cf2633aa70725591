use crate::error::{invalid, Result};
use crate::signal::{forward_padded, inverse_real, Trace, Wavelet};

use super::operator::fft_size;

/// Regularized autocorrelation kernel `ĝ = |ŵ|²/(|ŵ|² + μ)` on the default grid
/// of at least 16 wavelet lengths.
pub fn g_kernel(w: &Wavelet, mu: f64) -> Result<Trace> {
    g_kernel_on(w, mu, fft_size(16 * w.trace().len()))
}

/// As [`g_kernel`] on an odd grid of `n` points; the result is on lags `−K·dt … K·dt`.
pub fn g_kernel_on(w: &Wavelet, mu: f64, n: usize) -> Result<Trace> {
    if !(mu > 0.0) || !mu.is_finite() {
        return invalid(format!("mu must be positive, got {mu}"));
    }
    if n.is_multiple_of(2) || n < w.trace().len() {
        return invalid(format!("kernel grid {n} must be odd and hold the wavelet"));
    }
    let dt = w.dt();
    let spec = forward_padded(w.trace().samples(), n, dt)
        .into_iter()
        .map(|c| {
            let p = c.norm_sqr();
            (p / (p + mu)).into()
        })
        .collect();
    let circ = inverse_real(spec, dt);
    let k = (n - 1) / 2;
    // Average the two mirror samples so the result is even to the last bit.
    let samples = (0..n)
        .map(|i| {
            let lag = i as i64 - k as i64;
            let a = circ[lag.rem_euclid(n as i64) as usize];
            let b = circ[(-lag).rem_euclid(n as i64) as usize];
            0.5 * (a + b)
        })
        .collect();
    Ok(Trace::from_parts(samples, dt, -(k as f64) * dt))
}
