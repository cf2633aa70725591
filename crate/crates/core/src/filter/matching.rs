use serde::Serialize;

use super::operator::TraceOperator;
use crate::error::{invalid, AwiError, Result};
use crate::signal::Trace;

/// A filter `u_σ` on a symmetric lag axis, in units of 1/time.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingFilter {
    pub trace: Trace,
    pub sigma: f64,
    /// Length of the circular grid the filter was solved on.
    pub fft_len: usize,
    /// Fraction of `‖u‖²` dropped by the lag window (0 without a window).
    pub outside_energy: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FilterOptions {
    /// Circular grid length; odd, and at least the two trace lengths combined.
    pub fft_len: Option<usize>,
    /// Keep lags in `[−T, T]` only. The full grid is kept by default.
    pub lag_window: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterDiagnostics {
    pub norm_u: f64,
    pub norm_tu: f64,
    /// `‖Tu‖/‖u‖`, seconds.
    pub ratio: f64,
    pub residual_norm: f64,
    pub data_norm: f64,
    /// `‖predicted * u − observed‖ / ‖observed‖`.
    pub residual_ratio: f64,
    /// Energy centroid `⟨t u, u⟩/‖u‖²`.
    pub centroid: f64,
    /// RMS width about the centroid.
    pub width: f64,
    /// Fraction of `‖Tu‖²` carried by the outer tenth of the lag axis.
    pub edge_fraction: f64,
}

pub fn solve_filter(predicted: &Trace, observed: &Trace, sigma: f64) -> Result<MatchingFilter> {
    solve_filter_with(predicted, observed, sigma, &FilterOptions::default())
}

/// Solves `(SᵀS + σ)u = Sᵀd` in frequency: `û = conj(p̂) d̂ / (|p̂|² + σ)`.
pub fn solve_filter_with(
    predicted: &Trace,
    observed: &Trace,
    sigma: f64,
    opts: &FilterOptions,
) -> Result<MatchingFilter> {
    Ok(solve_on(predicted, observed, sigma, opts)?.0)
}

pub(crate) fn solve_on(
    predicted: &Trace,
    observed: &Trace,
    sigma: f64,
    opts: &FilterOptions,
) -> Result<(MatchingFilter, TraceOperator)> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be positive, got {sigma}"));
    }
    let op = TraceOperator::new(predicted, observed, opts.fft_len)?;
    let u = op.solve(sigma);
    let (trace, outside_energy) = match opts.lag_window {
        None => (op.lag_trace(u), 0.0),
        Some(t_lag) => {
            if !(t_lag > 0.0) {
                return invalid(format!("lag window must be positive, got {t_lag}"));
            }
            let k = op.half();
            let kw = ((t_lag / op.dt() + 1e-9).floor() as usize).min(k);
            let total: f64 = u.iter().map(|v| v * v).sum();
            let kept = u[k - kw..=k + kw].to_vec();
            let inside: f64 = kept.iter().map(|v| v * v).sum();
            let outside = if total > 0.0 { (total - inside).max(0.0) / total } else { 0.0 };
            (Trace::from_parts(kept, op.dt(), -(kw as f64) * op.dt()), outside)
        }
    };
    Ok((MatchingFilter { trace, sigma, fft_len: op.len(), outside_energy }, op))
}

pub fn filter_diagnostics(
    u: &MatchingFilter,
    predicted: &Trace,
    observed: &Trace,
) -> Result<FilterDiagnostics> {
    let op = TraceOperator::new(predicted, observed, Some(u.fft_len))?;
    diagnostics_on(u, &op)
}

pub(crate) fn diagnostics_on(u: &MatchingFilter, op: &TraceOperator) -> Result<FilterDiagnostics> {
    let tr = &u.trace;
    let norm_sq = tr.norm_sq();
    if norm_sq == 0.0 {
        return Err(AwiError::UndefinedRatio("filter is identically zero".into()));
    }
    let (mut m1, mut m2) = (0.0, 0.0);
    for (t, v) in tr.times().zip(tr.samples()) {
        m1 += t * v * v;
        m2 += t * t * v * v;
    }
    m1 *= tr.dt();
    m2 *= tr.dt();
    let edge = 0.9 * tr.t_end().abs().max(tr.t0().abs());
    let outer: f64 = tr
        .times()
        .zip(tr.samples())
        .filter(|(t, _)| t.abs() > edge)
        .map(|(t, v)| t * t * v * v)
        .sum::<f64>()
        * tr.dt();
    let data_norm = op.target_norm_sq().sqrt();
    if data_norm == 0.0 {
        return Err(AwiError::UndefinedRatio("observed trace is identically zero".into()));
    }
    let residual_norm = op.residual_norm(&op.embed(tr)?);
    let centroid = m1 / norm_sq;
    Ok(FilterDiagnostics {
        norm_u: norm_sq.sqrt(),
        norm_tu: m2.sqrt(),
        ratio: (m2 / norm_sq).sqrt(),
        residual_norm,
        data_norm,
        residual_ratio: residual_norm / data_norm,
        centroid,
        width: (m2 / norm_sq - centroid * centroid).max(0.0).sqrt(),
        edge_fraction: if m2 > 0.0 { outer / m2 } else { 0.0 },
    })
}
