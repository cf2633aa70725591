use serde::{Deserialize, Serialize};

use super::Trace;
use crate::error::{invalid, Result};

/// Mother wavelet shapes, both built from the unit-width Gaussian `e^{-t²/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveletKind {
    /// `d/dt e^{-t²/2}`, odd.
    GaussianDerivative,
    /// `-d²/dt² e^{-t²/2}`, even.
    Ricker,
}

impl WaveletKind {
    fn shape(self, t: f64) -> f64 {
        let g = (-0.5 * t * t).exp();
        match self {
            WaveletKind::GaussianDerivative => -t * g,
            WaveletKind::Ricker => (1.0 - t * t) * g,
        }
    }

    /// Characteristic width of the mother shape in seconds.
    pub fn characteristic_width(self) -> f64 {
        1.0
    }

    pub fn name(self) -> &'static str {
        match self {
            WaveletKind::GaussianDerivative => "gaussian_derivative",
            WaveletKind::Ricker => "ricker",
        }
    }
}

impl std::str::FromStr for WaveletKind {
    type Err = crate::AwiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian_derivative" => Ok(WaveletKind::GaussianDerivative),
            "ricker" => Ok(WaveletKind::Ricker),
            other => invalid(format!("unknown wavelet kind '{other}'")),
        }
    }
}

/// A member `w_λ(t) = λ^{-1/2} w₁(t/λ)` of a scaled wavelet family, sampled
/// symmetrically about `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet {
    trace: Trace,
    lambda_scale: f64,
    kind: WaveletKind,
    half_support: f64,
    amplitude: f64,
}

/// Samples `shape(t/λ)` on `|t| ≤ λ·half_support` and removes the residual mean
/// left by truncation with a matching Gaussian, so that `Σ w = 0`.
fn sample_shape(kind: WaveletKind, lambda: f64, dt: f64, half_support: f64) -> (Vec<f64>, f64) {
    let m = (lambda * half_support / dt + 1e-9).floor() as i64;
    let ts: Vec<f64> = (-m..=m).map(|i| i as f64 * dt).collect();
    let raw: Vec<f64> = ts.iter().map(|&t| kind.shape(t / lambda)).collect();
    let bump: Vec<f64> = ts.iter().map(|&t| (-0.5 * (t / lambda).powi(2)).exp()).collect();
    let c = raw.iter().sum::<f64>() / bump.iter().sum::<f64>();
    let samples = raw.iter().zip(&bump).map(|(r, b)| r - c * b).collect();
    (samples, -(m as f64) * dt)
}

impl Wavelet {
    /// The λ = 1 member, normalized to unit L² norm with zero mean.
    pub fn mother(kind: WaveletKind, dt: f64, half_support: f64) -> Result<Wavelet> {
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid(format!("dt must be positive, got {dt}"));
        }
        if !(half_support > 0.0) || !half_support.is_finite() {
            return invalid(format!("half support must be positive, got {half_support}"));
        }
        if half_support < 6.0 * kind.characteristic_width() {
            return invalid(format!(
                "half support {half_support} s is below 6 characteristic widths of {}",
                kind.name()
            ));
        }
        if dt > 0.25 * kind.characteristic_width() {
            return invalid(format!("dt {dt} s under-samples the mother wavelet"));
        }
        let (raw, t0) = sample_shape(kind, 1.0, dt, half_support);
        let energy = dt * raw.iter().map(|v| v * v).sum::<f64>();
        let amplitude = 1.0 / energy.sqrt();
        let samples = raw.into_iter().map(|v| v * amplitude).collect();
        Ok(Wavelet {
            trace: Trace::new(samples, dt, t0)?,
            lambda_scale: 1.0,
            kind,
            half_support,
            amplitude,
        })
    }

    /// Rescales a mother wavelet to `w_λ`, sampled on the same dt grid.
    pub fn scaled(&self, lambda: f64) -> Result<Wavelet> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return invalid(format!("lambda must lie in (0, 1], got {lambda}"));
        }
        if self.lambda_scale != 1.0 {
            return invalid("only a mother wavelet (lambda = 1) can be rescaled");
        }
        let dt = self.dt();
        let (raw, t0) = sample_shape(self.kind, lambda, dt, self.half_support);
        if raw.len() < 3 {
            return invalid(format!("lambda {lambda} leaves fewer than 3 samples at dt {dt}"));
        }
        let gain = self.amplitude / lambda.sqrt();
        let samples = raw.into_iter().map(|v| v * gain).collect();
        Ok(Wavelet {
            trace: Trace::new(samples, dt, t0)?,
            lambda_scale: lambda,
            kind: self.kind,
            half_support: self.half_support,
            amplitude: self.amplitude,
        })
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn lambda_scale(&self) -> f64 {
        self.lambda_scale
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.trace.dt()
    }

    /// Half-width of the sampled support, `λ·half_support`.
    pub fn half_width(&self) -> f64 {
        -self.trace.t0()
    }

    /// Source waveform `f_λ(t) = (1/ρ)∫_{-∞}^t w_λ`, trapezoidal cumulative sum.
    pub fn source_waveform(&self, rho: f64) -> Trace {
        let dt = self.dt();
        let mut acc = 0.0;
        let mut prev = 0.0;
        let samples = self
            .trace
            .samples()
            .iter()
            .map(|&w| {
                acc += 0.5 * dt * (prev + w);
                prev = w;
                acc / rho
            })
            .collect();
        Trace::from_parts(samples, dt, self.trace.t0())
    }
}

/// Convenience: `scale_wavelet(make_mother_wavelet(..), λ)`.
pub fn make_mother_wavelet(kind: WaveletKind, dt: f64, half_support: f64) -> Result<Wavelet> {
    Wavelet::mother(kind, dt, half_support)
}

pub fn scale_wavelet(w1: &Wavelet, lambda: f64) -> Result<Wavelet> {
    w1.scaled(lambda)
}
