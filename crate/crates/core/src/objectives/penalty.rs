//! Penalty forms of MSWI and AWI: the filter is no longer the exact
//! Tikhonov solution but minimizes the least-squares fit plus `α²` times a
//! `T_ε`-weighted norm, solved per trace by preconditioned CG.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::filter::{pcg, TraceOperator};
use crate::forward::Gather;
use crate::signal::t_eps_multiplier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    /// `½(‖Su − d‖² + σ‖u‖² + α²‖T_ε u‖²)`.
    Mswi,
    /// `‖Su − d‖² + σ‖u‖² + α²‖T_ε u‖²/‖u_σ‖²`.
    Awi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyOptions {
    /// Relative residual tolerance for CG.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PenaltyOptions {
    fn default() -> Self {
        PenaltyOptions { tol: 1e-10, max_iter: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyTerm {
    pub id: usize,
    /// Penalty objective at its minimizer.
    pub value: f64,
    /// Value minus the α = 0 value, evaluated without cancellation.
    pub increment: f64,
    /// The small-α slope of the increment: `c·w·‖T_ε u_σ‖²` (c = ½ for MSWI).
    pub limit: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltyReport {
    pub kind: PenaltyKind,
    pub total: f64,
    pub increment: f64,
    pub limit: f64,
    pub terms: Vec<PenaltyTerm>,
}

struct TraceSolve<'a> {
    op: &'a TraceOperator,
    sigma: f64,
    /// `w·t_ε(lag)²` per lag.
    weight: Vec<f64>,
}

impl TraceSolve<'_> {
    fn apply(&self, u: &[f64], alpha2: f64) -> Vec<f64> {
        let mut out = self.op.normal(u, self.sigma);
        for ((o, w), v) in out.iter_mut().zip(&self.weight).zip(u) {
            *o += alpha2 * w * v;
        }
        out
    }
}

fn dt_dot(dt: f64, a: &[f64], b: &[f64]) -> f64 {
    dt * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

fn trace_penalty(
    op: &TraceOperator,
    id: usize,
    kind: PenaltyKind,
    sigma: f64,
    alpha: f64,
    eps: f64,
    opts: &PenaltyOptions,
) -> Result<PenaltyTerm> {
    let dt = op.dt();
    let u0 = op.solve(sigma);
    let q0 = op.quadratic(&u0, sigma);
    let w = match kind {
        PenaltyKind::Mswi => 1.0,
        PenaltyKind::Awi => {
            let n = dt_dot(dt, &u0, &u0);
            if n == 0.0 {
                return Err(crate::AwiError::UndefinedRatio(format!(
                    "pair {id}: zero filter gives no penalty weight"
                )));
            }
            1.0 / n
        }
    };
    let weight: Vec<f64> = (0..op.len()).map(|i| w * t_eps_multiplier(op.lag(i), eps).powi(2)).collect();
    let tu0: f64 = dt * u0.iter().zip(&weight).map(|(v, wt)| wt * v * v).sum::<f64>();
    let half = if kind == PenaltyKind::Mswi { 0.5 } else { 1.0 };
    let alpha2 = alpha * alpha;
    let solve = TraceSolve { op, sigma, weight };

    let (u, iterations) = if alpha2 == 0.0 {
        (u0.clone(), 0)
    } else {
        let b = op.rhs();
        let wmax = solve.weight.iter().cloned().fold(0.0, f64::max);
        let spectral = alpha2 * wmax <= op.peak_power() + sigma;
        let out = if spectral {
            pcg(|x| solve.apply(x, alpha2), |r| op.spectral_inverse(r, sigma), &b, Some(u0.clone()), opts.tol, opts.max_iter)?
        } else {
            let diag: Vec<f64> = solve.weight.iter().map(|wt| 1.0 / (op.mean_power() + sigma + alpha2 * wt)).collect();
            pcg(
                |x| solve.apply(x, alpha2),
                |r| r.iter().zip(&diag).map(|(a, b)| a * b).collect(),
                &b,
                None,
                opts.tol,
                opts.max_iter,
            )?
        };
        (out.x, out.iterations)
    };
    // Q(u) − Q(u₀) = ‖u − u₀‖²_{SᵀS+σ} because u₀ minimizes Q.
    let du: Vec<f64> = u.iter().zip(&u0).map(|(a, b)| a - b).collect();
    let dq = dt_dot(dt, &du, &op.normal(&du, sigma));
    let tu: f64 = dt * u.iter().zip(&solve.weight).map(|(v, wt)| wt * v * v).sum::<f64>();
    let increment = half * (dq + alpha2 * tu);
    Ok(PenaltyTerm {
        id,
        value: half * q0 + increment,
        increment,
        limit: half * tu0,
        iterations,
    })
}

/// Per-trace penalty values. `α ≥ 0`, `ε ≥ 0`, `σ > 0`.
pub fn penalty_report(
    kind: PenaltyKind,
    pred: &Gather,
    obs: &Gather,
    sigma: f64,
    alpha: f64,
    eps: f64,
    opts: &PenaltyOptions,
) -> Result<PenaltyReport> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return invalid(format!("sigma must be positive, got {sigma}"));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return invalid(format!("alpha must be non-negative, got {alpha}"));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return invalid(format!("eps must be non-negative, got {eps}"));
    }
    let pairs = pred.zip(obs)?;
    let terms: Vec<PenaltyTerm> = pairs
        .par_iter()
        .map(|&(id, p, d)| {
            let op = TraceOperator::new(p, d, None)?;
            trace_penalty(&op, id, kind, sigma, alpha, eps, opts)
        })
        .collect::<Result<_>>()?;
    Ok(PenaltyReport {
        kind,
        total: terms.iter().map(|t| t.value).sum(),
        increment: terms.iter().map(|t| t.increment).sum(),
        limit: terms.iter().map(|t| t.limit).sum(),
        terms,
    })
}

/// `Σ min_u ½(‖Su − d‖² + σ‖u‖² + α²‖T_ε u‖²)`.
pub fn j_penalty_mswi(pred: &Gather, obs: &Gather, sigma: f64, alpha: f64, eps: f64) -> Result<f64> {
    Ok(penalty_report(PenaltyKind::Mswi, pred, obs, sigma, alpha, eps, &PenaltyOptions::default())?.total)
}

/// `Σ min_u (‖Su − d‖² + σ‖u‖² + α²‖T_ε u‖²/‖u_σ‖²)`.
pub fn j_penalty_awi(pred: &Gather, obs: &Gather, sigma: f64, alpha: f64, eps: f64) -> Result<f64> {
    Ok(penalty_report(PenaltyKind::Awi, pred, obs, sigma, alpha, eps, &PenaltyOptions::default())?.total)
}
