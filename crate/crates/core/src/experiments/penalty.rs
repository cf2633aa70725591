use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::scenario::Scenario;
use super::table::SweepTable;
use crate::error::{invalid, Result};
use crate::filter::{pcg, solve_on, FilterOptions};
use crate::objectives::{gather_diagnostics, penalty_report, PenaltyKind, PenaltyOptions};
use crate::signal::t_eps_multiplier;

/// A finite coercive least-squares problem `min ½(‖Su − d‖² + σ‖u‖² + α²‖Tu‖²)`
/// with `T = diag(t)`, the abstract setting of the penalty limit.
#[derive(Debug, Clone, PartialEq)]
pub struct DeskModel {
    pub n: usize,
    /// Row-major `n × n`.
    pub s: Vec<f64>,
    pub d: Vec<f64>,
    pub t: Vec<f64>,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeskSolution {
    pub u: Vec<f64>,
    pub value: f64,
    /// `J̃_α − J̃_0`, evaluated as `½(‖u_α − u₀‖²_{SᵀS+σ} + α²‖Tu_α‖²)`.
    pub increment: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl DeskModel {
    /// `S = 2I + E` with `E` uniform in `[−½, ½]`, `d` uniform in `[−1, 1]`,
    /// centred lags `t_i = i − (n−1)/2`, `σ = 0.1`.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return invalid(format!("desk model needs n ≥ 2, got {n}"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                s[i * n + j] = rng.gen_range(-0.5..0.5) + if i == j { 2.0 } else { 0.0 };
            }
        }
        let d = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = (0..n).map(|i| i as f64 - (n as f64 - 1.0) / 2.0).collect();
        Ok(DeskModel { n, s, d, t, sigma: 0.1 })
    }

    fn s_mul(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(&self.s[i * self.n..(i + 1) * self.n], u)).collect()
    }

    fn st_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, yi) in y.iter().enumerate() {
            for (o, sij) in out.iter_mut().zip(&self.s[i * self.n..(i + 1) * self.n]) {
                *o += sij * yi;
            }
        }
        out
    }

    /// `(SᵀS + σ + α²T²)u`.
    pub fn normal(&self, u: &[f64], alpha: f64) -> Vec<f64> {
        let mut out = self.st_mul(&self.s_mul(u));
        for ((o, v), t) in out.iter_mut().zip(u).zip(&self.t) {
            *o += (self.sigma + alpha * alpha * t * t) * v;
        }
        out
    }

    pub fn objective(&self, u: &[f64], alpha: f64) -> f64 {
        let res: Vec<f64> = self.s_mul(u).iter().zip(&self.d).map(|(a, b)| a - b).collect();
        let tu: f64 = u.iter().zip(&self.t).map(|(v, t)| (t * v).powi(2)).sum();
        0.5 * (dot(&res, &res) + self.sigma * dot(u, u) + alpha * alpha * tu)
    }

    /// Minimizer by CG on the normal equations.
    pub fn solve(&self, alpha: f64) -> Result<DeskSolution> {
        let b = self.st_mul(&self.d);
        let solve = |a: f64| pcg(|x| self.normal(x, a), |r| r.to_vec(), &b, None, 1e-13, 10 * self.n);
        let u0 = solve(0.0)?.x;
        let out = solve(alpha)?;
        let du: Vec<f64> = out.x.iter().zip(&u0).map(|(a, b)| a - b).collect();
        let tu: f64 = out.x.iter().zip(&self.t).map(|(v, t)| (t * v).powi(2)).sum();
        let increment = 0.5 * (dot(&du, &self.normal(&du, 0.0)) + alpha * alpha * tu);
        Ok(DeskSolution { value: self.objective(&out.x, alpha), u: out.x, increment, iterations: out.iterations })
    }
}

/// `(J̃_α − J̃_0)/α²` on a random desk model against its limit `½‖Tu₀‖²`.
pub fn desk_penalty_check(n: usize, seed: u64, alphas: &[f64]) -> Result<SweepTable> {
    let desk = DeskModel::random(n, seed)?;
    let u0 = desk.solve(0.0)?.u;
    let limit = 0.5 * u0.iter().zip(&desk.t).map(|(v, t)| (t * v).powi(2)).sum::<f64>();
    let mut table = SweepTable::new("alpha", &["increment_ratio", "limit", "rel_err", "iterations"]);
    for &alpha in alphas {
        if !(alpha > 0.0) {
            return invalid(format!("α must be positive, got {alpha}"));
        }
        let sol = desk.solve(alpha)?;
        let ratio = sol.increment / (alpha * alpha);
        table.push(alpha, vec![ratio, limit, (ratio - limit).abs() / limit, sol.iterations as f64]);
    }
    table.note("seed", seed as f64);
    Ok(table)
}

/// Tables produced by [`penalty_limit_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyLimit {
    /// α → 0 at the first (largest) ε.
    pub alpha_table: SweepTable,
    /// ε → 0 at the smallest α.
    pub eps_table: SweepTable,
}

/// Trace-level penalty limits: `(J̃_{α,σ,ε} − J̃_σ)/α²` for the MSWI and AWI
/// penalties against `½‖T_ε u_σ‖²` and `Σ‖T_ε u_σ‖²/‖u_σ‖²`. α is given as
/// multiples of the natural scale `√(σΣ‖u_σ‖²/Σ‖T_ε u_σ‖²)`; the ε table also
/// tracks `‖(T_ε − T)u_σ‖` and the AWI value it approaches.
pub fn penalty_limit_check(
    scenario: &Scenario,
    lambda: f64,
    r: f64,
    alpha_factors: &[f64],
    epsilons: &[f64],
) -> Result<PenaltyLimit> {
    if alpha_factors.is_empty() || alpha_factors.iter().any(|a| !(*a > 0.0)) {
        return invalid("α factors must be positive");
    }
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e >= 0.0)) {
        return invalid("ε values must be non-negative");
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) || alpha_factors.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("α factors and ε values must be strictly decreasing");
    }
    let sigma = r * lambda;
    let (pred, obs) = scenario.gathers(lambda)?;
    let filters: Vec<(Vec<f64>, Vec<f64>)> = pred
        .zip(&obs)?
        .par_iter()
        .map(|&(_, p, d)| {
            let (u, op) = solve_on(p, d, sigma, &FilterOptions::default())?;
            let lags = (0..op.len()).map(|i| op.lag(i)).collect();
            Ok((lags, u.trace.into_samples()))
        })
        .collect::<Result<_>>()?;
    let dt = pred.axis().dt;
    let norms = |eps: f64| {
        let mut nu = 0.0;
        let mut ntu = 0.0;
        let mut gap = 0.0;
        let mut awi = 0.0;
        for (lags, u) in &filters {
            let uu: f64 = dt * u.iter().map(|v| v * v).sum::<f64>();
            let tu: f64 = dt * lags.iter().zip(u).map(|(t, v)| (t_eps_multiplier(*t, eps) * v).powi(2)).sum::<f64>();
            gap += dt * lags.iter().zip(u).map(|(t, v)| ((t_eps_multiplier(*t, eps) - t) * v).powi(2)).sum::<f64>();
            nu += uu;
            ntu += tu;
            awi += tu / uu;
        }
        (nu, ntu, gap.sqrt(), awi)
    };
    let opts = PenaltyOptions::default();
    let slopes = |alpha: f64, eps: f64| -> Result<(f64, f64)> {
        let m = penalty_report(PenaltyKind::Mswi, &pred, &obs, sigma, alpha, eps, &opts)?;
        let a = penalty_report(PenaltyKind::Awi, &pred, &obs, sigma, alpha, eps, &opts)?;
        Ok((m.increment / (alpha * alpha), a.increment / (alpha * alpha)))
    };

    let eps0 = epsilons[0];
    let (nu, ntu, _, awi_lim) = norms(eps0);
    let natural = (sigma * nu / ntu).sqrt();
    let mut alpha_table = SweepTable::new(
        "alpha",
        &["alpha_factor", "mswi_slope", "mswi_limit", "mswi_rel_err", "awi_slope", "awi_limit", "awi_rel_err"],
    );
    for &f in alpha_factors {
        let alpha = f * natural;
        let (ms, aw) = slopes(alpha, eps0)?;
        let ml = 0.5 * ntu;
        alpha_table.push(
            alpha,
            vec![f, ms, ml, (ms - ml).abs() / ml, aw, awi_lim, (aw - awi_lim).abs() / awi_lim],
        );
    }
    alpha_table.note("natural_alpha", natural);
    alpha_table.note("eps", eps0);
    alpha_table.note("sigma", sigma);

    let j_awi = gather_diagnostics(&pred, &obs, sigma, &FilterOptions::default())?.iter().map(|(_, d)| d.ratio * d.ratio).sum::<f64>();
    let alpha_min = alpha_factors[alpha_factors.len() - 1] * natural;
    let mut eps_table = SweepTable::new(
        "eps",
        &["teps_gap", "mswi_slope", "mswi_limit", "mswi_rel_err", "awi_slope", "awi_limit", "j_awi"],
    );
    for &eps in epsilons {
        let (_, ntu, gap, awi_lim) = norms(eps);
        let (ms, aw) = slopes(alpha_min, eps)?;
        let ml = 0.5 * ntu;
        eps_table.push(eps, vec![gap, ms, ml, (ms - ml).abs() / ml, aw, awi_lim, j_awi]);
    }
    eps_table.note("alpha", alpha_min);
    eps_table.note("sigma", sigma);
    Ok(PenaltyLimit { alpha_table, eps_table })
}
