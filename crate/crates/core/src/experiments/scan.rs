use rayon::prelude::*;
use serde::Serialize;

use super::scenario::Scenario;
use super::table::strict_local_minima;
use crate::error::{invalid, Result};
use crate::filter::FilterOptions;
use crate::forward::model_gather;
use crate::medium::{MediumKind, MediumModel};
use crate::objectives::{gather_diagnostics, j_fwi, ObjectiveKind};

/// One-parameter model families built around the observed medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    /// Every velocity of κ* multiplied by the parameter; truth is 1.
    VelocityScale,
    /// κ*'s linear-gradient medium with the gradient replaced by the parameter.
    GradientStrength,
}

impl ModelFamily {
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::VelocityScale => "velocity_scale",
            ModelFamily::GradientStrength => "gradient_strength",
        }
    }

    pub fn member(self, star: &MediumModel, p: f64) -> Result<MediumModel> {
        match self {
            ModelFamily::VelocityScale => star.scaled(p),
            ModelFamily::GradientStrength => match &star.kind {
                MediumKind::LinearGradient { c0, axis, .. } => {
                    let mut m = MediumModel::linear_gradient(*c0, p, *axis)?;
                    m.rho = star.rho;
                    Ok(m)
                }
                _ => invalid("gradient-strength family needs a linear-gradient observed medium"),
            },
        }
    }

    /// Parameter value that reproduces κ*.
    pub fn truth(self, star: &MediumModel) -> Result<f64> {
        match (self, &star.kind) {
            (ModelFamily::VelocityScale, _) => Ok(1.0),
            (ModelFamily::GradientStrength, MediumKind::LinearGradient { g, .. }) => Ok(*g),
            _ => invalid("gradient-strength family needs a linear-gradient observed medium"),
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = crate::AwiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "velocity_scale" | "velocity" => Ok(ModelFamily::VelocityScale),
            "gradient_strength" | "gradient" => Ok(ModelFamily::GradientStrength),
            other => invalid(format!("unknown model family '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCurve {
    pub kind: ObjectiveKind,
    pub values: Vec<f64>,
    /// Grid indices of strict local minima.
    pub minima: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub family: ModelFamily,
    pub grid: Vec<f64>,
    pub truth: f64,
    pub curves: Vec<ScanCurve>,
}

impl ScanResult {
    pub fn curve(&self, kind: ObjectiveKind) -> Option<&ScanCurve> {
        self.curves.iter().find(|c| c.kind == kind)
    }

    /// Grid index closest to the true parameter.
    pub fn truth_index(&self) -> usize {
        let d = |i: usize| (self.grid[i] - self.truth).abs();
        (0..self.grid.len()).min_by(|&a, &b| d(a).total_cmp(&d(b))).unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(self.family.name());
        for c in &self.curves {
            s.push_str(&format!(",j_{}", c.kind.name()));
        }
        s.push('\n');
        for (i, p) in self.grid.iter().enumerate() {
            s.push_str(&format!("{p:.12e}"));
            for c in &self.curves {
                s.push_str(&format!(",{:.12e}", c.values[i]));
            }
            s.push('\n');
        }
        for c in &self.curves {
            let at: Vec<String> = c.minima.iter().map(|&i| format!("{:.12e}", self.grid[i])).collect();
            s.push_str(&format!("# minima(j_{})={}: [{}]\n", c.kind.name(), c.minima.len(), at.join(" ")));
        }
        s
    }
}

/// Evaluates one objective for the family member at `p`.
pub fn family_objective(
    kind: ObjectiveKind,
    scenario: &Scenario,
    family: ModelFamily,
    p: f64,
    lambda: f64,
    r: f64,
) -> Result<f64> {
    Ok(family_objectives(scenario, family, p, lambda, r, &[kind])?[0])
}

fn family_objectives(
    scenario: &Scenario,
    family: ModelFamily,
    p: f64,
    lambda: f64,
    r: f64,
    kinds: &[ObjectiveKind],
) -> Result<Vec<f64>> {
    let medium = family.member(&scenario.medium_star, p)?;
    let w = scenario.mother.scaled(lambda)?;
    let pred = model_gather(&medium, &scenario.geometry, &w, &scenario.opts)?;
    let obs = scenario.observed(lambda)?;
    let sigma = r * lambda;
    let diag = if kinds.iter().any(|k| *k != ObjectiveKind::Fwi) {
        gather_diagnostics(&pred, &obs, sigma, &FilterOptions::default())?
    } else {
        Vec::new()
    };
    kinds
        .iter()
        .map(|k| match k {
            ObjectiveKind::Fwi => Ok(j_fwi(&pred, &obs)?.total),
            ObjectiveKind::Awi => Ok(diag.iter().map(|(_, d)| d.ratio * d.ratio).sum()),
            ObjectiveKind::Mswi => Ok(diag.iter().map(|(_, d)| d.norm_tu * d.norm_tu).sum()),
        })
        .collect()
}

/// J_FWI, J_AWI and J_MSWI along the family; the scenario's predicted medium
/// is ignored in favour of the family members.
pub fn objective_scan(
    scenario: &Scenario,
    family: ModelFamily,
    grid: &[f64],
    lambda: f64,
    r: f64,
) -> Result<ScanResult> {
    if grid.len() < 3 {
        return invalid("scan grid needs at least 3 points");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("scan grid must be strictly increasing");
    }
    let kinds = [ObjectiveKind::Fwi, ObjectiveKind::Awi, ObjectiveKind::Mswi];
    let values: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&p| family_objectives(scenario, family, p, lambda, r, &kinds))
        .collect::<Result<_>>()?;
    let curves = kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let v: Vec<f64> = values.iter().map(|row| row[k]).collect();
            ScanCurve { kind, minima: strict_local_minima(&v), values: v }
        })
        .collect();
    Ok(ScanResult { family, grid: grid.to_vec(), truth: family.truth(&scenario.medium_star)?, curves })
}

/// `n` equally spaced points on `[truth·(1 − half), truth·(1 + half)]`.
pub fn relative_grid(truth: f64, half: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| truth * (1.0 - half + 2.0 * half * i as f64 / (n as f64 - 1.0)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DescentOptions {
    pub lambda: f64,
    pub r: f64,
    /// Initial step multiplying the gradient at every iteration.
    pub step: f64,
    /// Central-difference half step.
    pub fd_step: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Largest parameter change per iteration.
    pub max_move: f64,
    /// Backtracking gives up below this parameter change.
    pub min_move: f64,
}

impl DescentOptions {
    pub fn new(lambda: f64, r: f64) -> Self {
        DescentOptions {
            lambda,
            r,
            step: 2e-3,
            fd_step: 1e-4,
            max_iter: 100,
            grad_tol: 1e-6,
            max_move: 0.02,
            min_move: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    /// No decrease found down to the smallest allowed move.
    Stagnated,
    MaxIterations,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub kind: ObjectiveKind,
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    pub gradients: Vec<f64>,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.params.len() - 1
    }

    pub fn last(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,parameter,value,gradient\n");
        for (i, (p, v)) in self.params.iter().zip(&self.values).enumerate() {
            let g = self.gradients.get(i).copied().unwrap_or(f64::NAN);
            s.push_str(&format!("{i},{p:.12e},{v:.12e},{g:.12e}\n"));
        }
        s.push_str(&format!("# objective={}, stop={:?}\n", self.kind.name(), self.stop));
        s
    }
}

/// Gradient descent on one family parameter with central-difference
/// gradients and backtracking from a fixed initial step. The gradient is taken
/// as zero where neither neighbour at `±fd_step` has a lower value.
pub fn local_descent(
    kind: ObjectiveKind,
    scenario: &Scenario,
    family: ModelFamily,
    start: f64,
    opts: &DescentOptions,
) -> Result<Trajectory> {
    if !(opts.step > 0.0 && opts.fd_step > 0.0 && opts.max_move > 0.0 && opts.min_move > 0.0) {
        return invalid("descent steps must be positive");
    }
    let eval = |p: f64| family_objective(kind, scenario, family, p, opts.lambda, opts.r);
    let mut x = start;
    let mut f = eval(x)?;
    let mut traj = Trajectory { kind, params: vec![x], values: vec![f], gradients: Vec::new(), stop: StopReason::MaxIterations };
    if !f.is_finite() {
        traj.stop = StopReason::NonFinite;
        return Ok(traj);
    }
    for _ in 0..opts.max_iter {
        let (fp, fm) = (eval(x + opts.fd_step)?, eval(x - opts.fd_step)?);
        // A point no neighbour improves on is stationary at the difference
        // resolution; the central difference there only measures curvature.
        let g = if fp >= f && fm >= f { 0.0 } else { (fp - fm) / (2.0 * opts.fd_step) };
        traj.gradients.push(g);
        if !g.is_finite() {
            traj.stop = StopReason::NonFinite;
            return Ok(traj);
        }
        if g.abs() <= opts.grad_tol {
            traj.stop = StopReason::GradientTolerance;
            return Ok(traj);
        }
        let mut mv = (opts.step * g).clamp(-opts.max_move, opts.max_move);
        let accepted = loop {
            if mv.abs() < opts.min_move {
                break None;
            }
            match eval(x - mv) {
                Ok(f1) if f1 < f => break Some(f1),
                Ok(f1) if !f1.is_finite() => {
                    traj.stop = StopReason::NonFinite;
                    return Ok(traj);
                }
                _ => mv *= 0.5,
            }
        };
        match accepted {
            Some(f1) => {
                x -= mv;
                f = f1;
                traj.params.push(x);
                traj.values.push(f);
            }
            None => {
                traj.stop = StopReason::Stagnated;
                return Ok(traj);
            }
        }
    }
    Ok(traj)
}
