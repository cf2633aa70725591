use crate::error::{invalid, Result};

/// A uniformly sampled time series. Sample `n` sits at time `t0 + n·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    samples: Vec<f64>,
    dt: f64,
    t0: f64,
}

impl Trace {
    pub fn new(samples: Vec<f64>, dt: f64, t0: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return invalid(format!("sample interval must be positive and finite, got {dt}"));
        }
        if !t0.is_finite() {
            return invalid(format!("start time must be finite, got {t0}"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return invalid(format!("sample {i} is not finite"));
        }
        Ok(Trace { samples, dt, t0 })
    }

    /// Builds a trace without validation; callers guarantee `dt > 0` and finite samples.
    pub(crate) fn from_parts(samples: Vec<f64>, dt: f64, t0: f64) -> Self {
        debug_assert!(dt > 0.0);
        Trace { samples, dt, t0 }
    }

    pub fn zeros(n: usize, dt: f64, t0: f64) -> Result<Self> {
        Trace::new(vec![0.0; n], dt, t0)
    }

    pub fn from_fn(n: usize, dt: f64, t0: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        Trace::new(samples, dt, t0)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    /// Time of the last sample.
    pub fn t_end(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.time(i))
    }

    /// dt-weighted squared L² norm.
    pub fn norm_sq(&self) -> f64 {
        self.dt * self.samples.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.dt * self.samples.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Riemann sum approximating ∫x(t)dt.
    pub fn integral(&self) -> f64 {
        self.dt * self.samples.iter().sum::<f64>()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Trace {
        Trace::from_parts(self.samples.iter().map(|v| v * factor).collect(), self.dt, self.t0)
    }

    pub fn same_axis(&self, other: &Trace) -> bool {
        self.len() == other.len()
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t0 - other.t0).abs() <= 1e-9 * self.dt
    }

    /// Sample-wise `self + factor·other` on a shared axis.
    pub fn add_scaled(&self, other: &Trace, factor: f64) -> Result<Trace> {
        if !self.same_axis(other) {
            return invalid("traces do not share a time axis");
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Trace::from_parts(samples, self.dt, self.t0))
    }

    /// Index of the sample nearest to `t`, if it lies on the axis.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = ((t - self.t0) / self.dt).round();
        (x >= 0.0 && (x as usize) < self.len()).then_some(x as usize)
    }

    /// Linear interpolation at time `t`; zero outside the axis.
    pub fn value_at(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.dt;
        if x < 0.0 || x > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = x.floor() as usize;
        if i + 1 >= self.len() {
            return self.samples[self.len() - 1];
        }
        let f = x - i as f64;
        self.samples[i] * (1.0 - f) + self.samples[i + 1] * f
    }

    /// Sub-trace covering `[t_lo, t_hi]` (sample-aligned, clipped to the axis).
    pub fn window(&self, t_lo: f64, t_hi: f64) -> Trace {
        let lo = (((t_lo - self.t0) / self.dt) - 1e-9).ceil().max(0.0) as usize;
        let hi = ((((t_hi - self.t0) / self.dt) + 1e-9).floor() as isize).min(self.len() as isize - 1);
        if hi < lo as isize {
            return Trace::from_parts(Vec::new(), self.dt, self.time(lo.min(self.len())));
        }
        let hi = hi as usize;
        Trace::from_parts(self.samples[lo..=hi].to_vec(), self.dt, self.time(lo))
    }
}

/// A sampling grid `t0 + i·dt`, `i < n`, shared by the traces of a gather.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeAxis {
    pub n: usize,
    pub dt: f64,
    pub t0: f64,
}

impl TimeAxis {
    pub fn new(n: usize, dt: f64, t0: f64) -> Result<Self> {
        if n == 0 {
            return invalid("time axis needs at least one sample");
        }
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return invalid(format!("bad time axis: dt={dt}, t0={t0}"));
        }
        Ok(TimeAxis { n, dt, t0 })
    }

    /// Axis on `[t0, t_max]` with spacing `dt`.
    pub fn spanning(t0: f64, t_max: f64, dt: f64) -> Result<Self> {
        if !(t_max > t0) {
            return invalid(format!("empty time window [{t0}, {t_max}]"));
        }
        TimeAxis::new(((t_max - t0) / dt + 1e-9).floor() as usize + 1, dt, t0)
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.n as f64 - 1.0) * self.dt
    }

    pub fn zeros(&self) -> Trace {
        Trace::from_parts(vec![0.0; self.n], self.dt, self.t0)
    }

    pub fn of(trace: &Trace) -> TimeAxis {
        TimeAxis { n: trace.len(), dt: trace.dt(), t0: trace.t0() }
    }

    pub fn matches(&self, trace: &Trace) -> bool {
        trace.len() == self.n
            && (trace.dt() - self.dt).abs() <= 1e-12 * self.dt
            && (trace.t0() - self.t0).abs() <= 1e-9 * self.dt
    }
}
