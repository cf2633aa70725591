use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AwiError, Result};
use crate::filter::{diagnostics_on, solve_on, FilterDiagnostics, FilterOptions};
use crate::forward::Gather;
use crate::signal::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Fwi,
    Awi,
    Mswi,
}

impl ObjectiveKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Fwi => "fwi",
            ObjectiveKind::Awi => "awi",
            ObjectiveKind::Mswi => "mswi",
        }
    }

    /// The functional's formula, including its constant.
    pub fn convention(self) -> &'static str {
        match self {
            ObjectiveKind::Fwi => "J_FWI = 1/2 sum ||p - d||^2",
            ObjectiveKind::Awi => "J_AWI = sum ||T u||^2 / ||u||^2",
            ObjectiveKind::Mswi => "J_MSWI = sum ||T u||^2",
        }
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = AwiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fwi" => Ok(ObjectiveKind::Fwi),
            "awi" => Ok(ObjectiveKind::Awi),
            "mswi" => Ok(ObjectiveKind::Mswi),
            other => Err(AwiError::InvalidArgument(format!("unknown objective '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceTerm {
    pub value: f64,
    /// `‖Tu‖/‖u‖` (filter-based objectives only).
    pub ratio: Option<f64>,
    pub residual_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectiveReport {
    pub kind: ObjectiveKind,
    pub total: f64,
    pub per_trace: BTreeMap<usize, TraceTerm>,
    pub sigma: Option<f64>,
    pub lambda: Option<f64>,
    pub r: Option<f64>,
}

impl ObjectiveReport {
    fn from_terms(kind: ObjectiveKind, terms: Vec<(usize, TraceTerm)>, sigma: Option<f64>) -> Self {
        let per_trace: BTreeMap<usize, TraceTerm> = terms.into_iter().collect();
        let total = per_trace.values().map(|t| t.value).sum();
        ObjectiveReport { kind, total, per_trace, sigma, lambda: None, r: None }
    }

    /// Records the wavelength and coupling constant the run used.
    pub fn with_scale(mut self, lambda: f64, r: f64) -> Self {
        self.lambda = Some(lambda);
        self.r = Some(r);
        self
    }
}

pub fn j_fwi(pred: &Gather, obs: &Gather) -> Result<ObjectiveReport> {
    let terms = pred
        .zip(obs)?
        .into_iter()
        .map(|(id, p, d)| {
            let diff = p.add_scaled(d, -1.0)?;
            Ok((id, TraceTerm { value: 0.5 * diff.norm_sq(), ratio: None, residual_ratio: None }))
        })
        .collect::<Result<_>>()?;
    Ok(ObjectiveReport::from_terms(ObjectiveKind::Fwi, terms, None))
}

fn name_pair(id: usize) -> impl Fn(AwiError) -> AwiError {
    move |e| match e {
        AwiError::UndefinedRatio(m) => AwiError::UndefinedRatio(format!("pair {id}: {m}")),
        AwiError::DegenerateOperator(m) => AwiError::DegenerateOperator(format!("pair {id}: {m}")),
        other => other,
    }
}

/// Solves every per-trace filter (in parallel) and returns diagnostics in pair order.
pub(crate) fn gather_diagnostics(
    pred: &Gather,
    obs: &Gather,
    sigma: f64,
    opts: &FilterOptions,
) -> Result<Vec<(usize, FilterDiagnostics)>> {
    let pairs = pred.zip(obs)?;
    pairs
        .par_iter()
        .map(|&(id, p, d)| Ok((id, trace_diagnostics(p, d, sigma, opts).map_err(name_pair(id))?)))
        .collect()
}

fn trace_diagnostics(p: &Trace, d: &Trace, sigma: f64, opts: &FilterOptions) -> Result<FilterDiagnostics> {
    if d.is_zero() {
        return Err(AwiError::UndefinedRatio("observed trace is identically zero".into()));
    }
    let (u, op) = solve_on(p, d, sigma, opts)?;
    diagnostics_on(&u, &op)
}

fn filter_objective(
    kind: ObjectiveKind,
    pred: &Gather,
    obs: &Gather,
    sigma: f64,
    value: impl Fn(&FilterDiagnostics) -> f64,
) -> Result<ObjectiveReport> {
    let terms = gather_diagnostics(pred, obs, sigma, &FilterOptions::default())?
        .into_iter()
        .map(|(id, d)| {
            (id, TraceTerm { value: value(&d), ratio: Some(d.ratio), residual_ratio: Some(d.residual_ratio) })
        })
        .collect();
    Ok(ObjectiveReport::from_terms(kind, terms, Some(sigma)))
}

pub fn j_awi(pred: &Gather, obs: &Gather, sigma: f64) -> Result<ObjectiveReport> {
    filter_objective(ObjectiveKind::Awi, pred, obs, sigma, |d| d.ratio * d.ratio)
}

pub fn j_mswi(pred: &Gather, obs: &Gather, sigma: f64) -> Result<ObjectiveReport> {
    filter_objective(ObjectiveKind::Mswi, pred, obs, sigma, |d| d.norm_tu * d.norm_tu)
}

/// `Σ (‖Su_σ − d‖² + σ‖u_σ‖²)`, the regularized least-squares residual.
pub fn j_tilde(pred: &Gather, obs: &Gather, sigma: f64) -> Result<f64> {
    let pairs = pred.zip(obs)?;
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(id, p, d)| {
            let (u, op) = solve_on(p, d, sigma, &FilterOptions::default()).map_err(name_pair(id))?;
            Ok(op.quadratic(u.trace.samples(), sigma))
        })
        .collect::<Result<_>>()?;
    Ok(values.iter().sum())
}
