use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arrivals::ArrivalSet;
use super::gather::Gather;
use crate::error::{invalid, AwiError, Result};
use crate::medium::{
    amplitude, pair_travel_times, AmplitudeModel, Geometry, MediumModel, SourceReceiverPair,
};
use crate::signal::{convolve, delay_onto, hilbert_power, TimeAxis, Trace, Wavelet};

/// `a·w_λ(t − τ)` on `axis`, delayed spectrally so sub-sample times are exact.
pub fn leading_term_trace(a: f64, tau: f64, w: &Wavelet, axis: TimeAxis) -> Result<Trace> {
    if w.dt() != axis.dt {
        return invalid(format!("wavelet dt {} differs from axis dt {}", w.dt(), axis.dt));
    }
    delay_onto(&w.trace().scaled(a), tau, axis.n, axis.t0)
}

/// Smooth tail of the Green's function: `b₀δ + ∂_t(b·H)` with
/// `b(t) = B e^{−δt} S(t/onset)` and `S` the quintic smoothstep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderSpec {
    pub b0: f64,
    /// Decay rate δ, 1/s.
    pub decay: f64,
    pub scale_b: f64,
    /// Length of the smooth switch-on, s.
    pub onset: f64,
}

impl Default for RemainderSpec {
    /// A moderate tail: `b₀ = 0.5`, `B = 0.2`, `δ = 0.5/s`, 2 s onset.
    fn default() -> Self {
        RemainderSpec { b0: 0.5, decay: 0.5, scale_b: 0.2, onset: 2.0 }
    }
}

impl RemainderSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0) || !self.decay.is_finite() {
            return invalid(format!("remainder decay must be positive, got {}", self.decay));
        }
        if !(self.onset > 0.0) || !self.onset.is_finite() {
            return invalid(format!("remainder onset must be positive, got {}", self.onset));
        }
        if !self.b0.is_finite() || !self.scale_b.is_finite() {
            return invalid("remainder amplitudes must be finite");
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.b0 == 0.0 && self.scale_b == 0.0
    }

    /// `b(t)`, zero for `t ≤ 0`.
    pub fn b(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let x = (t / self.onset).min(1.0);
        self.scale_b * (-self.decay * t).exp() * x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }

    /// `∂_t b(t)`, continuous and zero for `t ≤ 0`.
    pub fn db(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let e = self.scale_b * (-self.decay * t).exp();
        if t >= self.onset {
            return -self.decay * e;
        }
        let x = t / self.onset;
        let s = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
        let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x) / self.onset;
        e * (ds - self.decay * s)
    }
}

/// `ρ(b₀δ + ∂_t(bH)) * f_λ`, delayed by `τ`, where `f_λ` is the source waveform.
pub fn remainder_trace(
    spec: &RemainderSpec,
    tau: f64,
    w: &Wavelet,
    axis: TimeAxis,
    rho: f64,
) -> Result<Trace> {
    spec.validate()?;
    let f = w.source_waveform(rho);
    let head = delay_onto(&f.scaled(rho * spec.b0), tau, axis.n, axis.t0)?;
    if spec.scale_b == 0.0 {
        return Ok(head);
    }
    // Kernel sampled so that its convolution with f lands on the axis grid.
    let k0 = axis.t0 - f.t0();
    let kernel = Trace::from_fn(axis.n, axis.dt, k0, |t| rho * spec.db(t - tau))?;
    let tail = convolve(&kernel, &f)?;
    let samples: Vec<f64> = head
        .samples()
        .iter()
        .zip(tail.samples())
        .map(|(a, b)| a + b)
        .collect();
    Trace::new(samples, axis.dt, axis.t0)
}

/// `Σ a_i H^{p_i} w(t − τ_i)`. The Hilbert powers act on the delayed events over
/// the whole axis, so their slowly decaying tails are not clipped to the wavelet support.
pub fn multi_arrival_trace(arrivals: &ArrivalSet, w: &Wavelet, axis: TimeAxis) -> Result<Trace> {
    let mut out = axis.zeros();
    for a in arrivals.arrivals() {
        let event = leading_term_trace(a.amplitude, a.tau, w, axis)?;
        let event = hilbert_power(&event, a.caustic_index);
        out = out.add_scaled(&event, 1.0)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatherOptions {
    pub axis: TimeAxis,
    pub remainder: Option<RemainderSpec>,
    pub amplitude_model: AmplitudeModel,
    pub amplitude_bound: f64,
    pub rho: f64,
    /// Source strength multiplying every geometric amplitude.
    pub gain: f64,
}

impl GatherOptions {
    pub fn new(axis: TimeAxis) -> Self {
        GatherOptions {
            axis,
            remainder: None,
            amplitude_model: AmplitudeModel::Unit,
            amplitude_bound: crate::medium::DEFAULT_LOG_AMPLITUDE_BOUND,
            rho: 1.0,
            gain: 1.0,
        }
    }

    /// Leading-term amplitude `a` for one pair.
    pub fn pair_amplitude(&self, pair: &SourceReceiverPair) -> Result<f64> {
        if !(self.gain > 0.0) || !self.gain.is_finite() {
            return invalid(format!("source gain must be positive, got {}", self.gain));
        }
        Ok(self.gain * amplitude(pair.source, pair.receiver, self.amplitude_model, self.amplitude_bound)?)
    }
}

/// Leading-term gather (plus optional remainder) for every pair of `geometry`.
pub fn model_gather(
    medium: &MediumModel,
    geometry: &Geometry,
    w: &Wavelet,
    opts: &GatherOptions,
) -> Result<Gather> {
    let times = pair_travel_times(medium, geometry)?;
    let traces: Vec<(usize, Trace)> = geometry
        .pairs()
        .par_iter()
        .zip(times.par_iter())
        .map(|(pair, &tau)| {
            let a = opts.pair_amplitude(pair)?;
            let name = |e: AwiError| match e {
                AwiError::Window(msg) => AwiError::Window(format!("pair {}: {msg}", pair.id)),
                other => other,
            };
            let mut trace = leading_term_trace(a, tau, w, opts.axis).map_err(name)?;
            if let Some(spec) = &opts.remainder {
                let r = remainder_trace(spec, tau, w, opts.axis, opts.rho).map_err(name)?;
                trace = trace.add_scaled(&r, 1.0)?;
            }
            Ok((pair.id, trace))
        })
        .collect::<Result<_>>()?;
    Gather::new(opts.axis, traces)
}
