use std::f64::consts::PI;

use num_complex::Complex64;

use super::spectrum::{bin_omega, fft, forward_padded, ifft, inverse_real};
use super::Trace;
use crate::error::{invalid, AwiError, Result};

/// Linear convolution approximating `∫a(s)b(t−s)ds`; output starts at `a.t0 + b.t0`.
pub fn convolve(a: &Trace, b: &Trace) -> Result<Trace> {
    let dt = a.dt();
    if (a.dt() - b.dt()).abs() > 1e-12 * dt {
        return invalid(format!("dt mismatch: {} vs {}", a.dt(), b.dt()));
    }
    if a.is_empty() || b.is_empty() {
        return invalid("cannot convolve an empty trace");
    }
    let len = a.len() + b.len() - 1;
    let n = len.next_power_of_two();
    let fa = forward_padded(a.samples(), n, dt);
    let fb = forward_padded(b.samples(), n, dt);
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    let mut out = inverse_real(prod, dt);
    out.truncate(len);
    Ok(Trace::from_parts(out, dt, a.t0() + b.t0()))
}

/// Linear cross-correlation `c(ℓ) = ∫a(t) b(t+ℓ) dt`; lag axis starts at `b.t0 − a.t_end`.
pub fn cross_correlate(a: &Trace, b: &Trace) -> Result<Trace> {
    let rev: Vec<f64> = a.samples().iter().rev().copied().collect();
    let ar = Trace::from_parts(rev, a.dt(), -a.t_end());
    convolve(&ar, b)
}

/// Applies the Hilbert transform `p` times via the multiplier `(−i·sgn ω)^p`,
/// periodic on the trace's own window. The DC and Nyquist bins are annihilated for `p > 0`.
pub fn hilbert_power(x: &Trace, p: u32) -> Trace {
    if p == 0 || x.is_empty() {
        return x.clone();
    }
    let n = x.len();
    let mut buf: Vec<Complex64> = x.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf);
    let minus_i = Complex64::new(0.0, -1.0);
    let pos = minus_i.powu(p);
    let neg = (-minus_i).powu(p);
    for (k, c) in buf.iter_mut().enumerate() {
        let nyquist = n.is_multiple_of(2) && k == n / 2;
        if k == 0 || nyquist {
            *c = Complex64::new(0.0, 0.0);
        } else if k < n.div_ceil(2) {
            *c *= pos;
        } else {
            *c *= neg;
        }
    }
    ifft(&mut buf);
    let scale = 1.0 / n as f64;
    Trace::from_parts(buf.into_iter().map(|c| c.re * scale).collect(), x.dt(), x.t0())
}

/// Multiplication by the sample time.
pub fn apply_t(x: &Trace) -> Trace {
    let samples = x.times().zip(x.samples()).map(|(t, v)| t * v).collect();
    Trace::from_parts(samples, x.dt(), x.t0())
}

/// Bounded multiply-by-time: `t / √(1 + ε²t²)`.
pub fn t_eps_multiplier(t: f64, eps: f64) -> f64 {
    t / (1.0 + eps * eps * t * t).sqrt()
}

pub fn apply_t_eps(x: &Trace, eps: f64) -> Result<Trace> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return invalid(format!("eps must be non-negative, got {eps}"));
    }
    let samples = x
        .times()
        .zip(x.samples())
        .map(|(t, v)| t_eps_multiplier(t, eps) * v)
        .collect();
    Ok(Trace::from_parts(samples, x.dt(), x.t0()))
}

fn require_nonzero(x: &Trace, what: &str) -> Result<f64> {
    let n = x.norm();
    if n == 0.0 {
        return Err(AwiError::UndefinedRatio(format!("{what} of a zero trace")));
    }
    Ok(n)
}

/// RMS width `‖Tx‖/‖x‖` about t = 0.
pub fn pulse_width(x: &Trace) -> Result<f64> {
    let n = require_nonzero(x, "pulse width")?;
    Ok(apply_t(x).norm() / n)
}

/// RMS angular frequency `((1/2π)∫ω²|x̂|²dω / ∫x²dt)^{1/2}`.
pub fn rms_frequency(x: &Trace) -> Result<f64> {
    let energy = require_nonzero(x, "RMS frequency")?.powi(2);
    let n = (4 * x.len()).next_power_of_two();
    let dt = x.dt();
    let spec = forward_padded(x.samples(), n, dt);
    let d_omega = 2.0 * PI / (n as f64 * dt);
    let moment: f64 = spec
        .iter()
        .enumerate()
        .map(|(k, c)| bin_omega(k, n, dt).powi(2) * c.norm_sqr())
        .sum::<f64>()
        * d_omega
        / (2.0 * PI);
    Ok((moment / energy).sqrt())
}

/// Pulse width times RMS frequency: `(angular, cyclic)` where cyclic = angular/2π.
/// The Heisenberg bounds are 1/2 and 1/(4π) respectively.
pub fn time_bandwidth(x: &Trace) -> Result<(f64, f64)> {
    let lk = pulse_width(x)? * rms_frequency(x)?;
    Ok((lk, lk / (2.0 * PI)))
}

/// Band-limited delay: samples `x(t − τ)` onto the axis `(n, dt, t0)` with a
/// spectral phase ramp for the sub-sample part. The whole support of `x` must
/// land inside the axis.
pub fn delay_onto(x: &Trace, tau: f64, n: usize, t0: f64) -> Result<Trace> {
    let dt = x.dt();
    if !tau.is_finite() {
        return invalid("delay must be finite");
    }
    // Sample j of the output reads x at index j − shift.
    let shift = (tau + x.t0() - t0) / dt;
    let whole = shift.floor();
    let frac = shift - whole;
    let start = whole as i64;
    let end = start + x.len() as i64 + i64::from(frac > 0.0);
    if start < 0 || end > n as i64 {
        return Err(AwiError::Window(format!(
            "delayed support [{:.6}, {:.6}] s exceeds window [{:.6}, {:.6}] s",
            x.t0() + tau,
            x.t_end() + tau,
            t0,
            t0 + (n as f64 - 1.0) * dt
        )));
    }
    let mut out = vec![0.0; n];
    if frac == 0.0 {
        out[start as usize..start as usize + x.len()].copy_from_slice(x.samples());
        return Ok(Trace::from_parts(out, dt, t0));
    }
    const GUARD: usize = 32;
    let len = (x.len() + 2 * GUARD).next_power_of_two();
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (b, &v) in buf[GUARD..].iter_mut().zip(x.samples()) {
        b.re = v;
    }
    fft(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        if len.is_multiple_of(2) && k == len / 2 {
            *c *= (PI * frac).cos();
        } else {
            let w = bin_omega(k, len, 1.0);
            *c *= Complex64::from_polar(1.0, -w * frac);
        }
    }
    ifft(&mut buf);
    let scale = 1.0 / len as f64;
    for (m, c) in buf.iter().enumerate() {
        let j = start + m as i64 - GUARD as i64;
        if (0..n as i64).contains(&j) {
            out[j as usize] = c.re * scale;
        }
    }
    Ok(Trace::from_parts(out, dt, t0))
}

/// Instantaneous amplitude `√(x² + (Hx)²)`.
pub fn envelope(x: &Trace) -> Trace {
    let h = hilbert_power(x, 1);
    let samples = x
        .samples()
        .iter()
        .zip(h.samples())
        .map(|(a, b)| (a * a + b * b).sqrt())
        .collect();
    Trace::from_parts(samples, x.dt(), x.t0())
}

/// Time of the largest sample in `[t_lo, t_hi]`, refined by a parabola through
/// the three samples around it.
pub fn peak_time(x: &Trace, t_lo: f64, t_hi: f64) -> Option<f64> {
    let lo = (((t_lo - x.t0()) / x.dt()).ceil().max(0.0)) as usize;
    let hi = (((t_hi - x.t0()) / x.dt()).floor() as isize).min(x.len() as isize - 1);
    if hi < lo as isize {
        return None;
    }
    let s = x.samples();
    let i = (lo..=hi as usize).max_by(|&a, &b| s[a].total_cmp(&s[b]))?;
    if i == 0 || i + 1 >= s.len() {
        return Some(x.time(i));
    }
    let (a, b, c) = (s[i - 1], s[i], s[i + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some(x.time(i) + offset.clamp(-1.0, 1.0) * x.dt())
}
