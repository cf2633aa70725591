//! Fast invariant checks that need no config beyond the seed.

use std::f64::consts::PI;

use awi_core::experiments::desk_penalty_check;
use awi_core::filter::{filter_diagnostics, g_kernel, solve_filter, TraceOperator};
use awi_core::forward::leading_term_trace;
use awi_core::medium::{distance, eikonal_solve, VelocityGrid};
use awi_core::signal::{pulse_width, time_bandwidth, TimeAxis, Wavelet, WaveletKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::{Failure, Outputs};
use crate::config::ScenarioConfig;
use crate::CliError;

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// `|J_AWI − (l(g)² + Δτ²)|` relative, worst over three shifts; also the
/// largest residual ratio, which must stay below ½.
fn identity() -> Result<[Check; 2], CliError> {
    let dt = 1e-3;
    let lambda = 0.125;
    let w = Wavelet::mother(WaveletKind::Ricker, dt, 8.0)?.scaled(lambda)?;
    let axis = TimeAxis::spanning(0.0, 16.0, dt)?;
    let a = 0.9;
    let p = leading_term_trace(a, 8.0, &w, axis)?;
    let sigma = 1e-2 * TraceOperator::new(&p, &p, None)?.peak_power() * lambda;
    let lg = pulse_width(&g_kernel(&w, sigma / (a * a))?)?;
    let (mut err, mut res) = (0.0f64, 0.0f64);
    for dtau in [0.0, 0.05, 0.1] {
        let d = leading_term_trace(a, 8.0 + dtau, &w, axis)?;
        let diag = filter_diagnostics(&solve_filter(&p, &d, sigma)?, &p, &d)?;
        let expect = lg * lg + dtau * dtau;
        err = err.max((diag.ratio.powi(2) - expect).abs() / expect);
        res = res.max(diag.residual_ratio);
    }
    Ok([
        Check { name: "leading_term_identity_rel_err", value: err, tolerance: 1e-6 },
        Check { name: "residual_ratio", value: res, tolerance: 0.5 },
    ])
}

/// Shortfall of `l·k/2π` below `1/(4π)` over both wavelet kinds.
fn heisenberg() -> Result<Check, CliError> {
    let mut worst = f64::NEG_INFINITY;
    for kind in [WaveletKind::Ricker, WaveletKind::GaussianDerivative] {
        let (_, cyclic) = time_bandwidth(Wavelet::mother(kind, 1e-3, 8.0)?.trace())?;
        worst = worst.max(1.0 / (4.0 * PI) - cyclic);
    }
    Ok(Check { name: "heisenberg_shortfall", value: worst, tolerance: 1e-6 })
}

fn eikonal() -> Result<Check, CliError> {
    let c = 2000.0;
    let grid = VelocityGrid::from_fn(101, 101, 10.0, [0.0, 0.0], |_| c)?;
    let src = [500.0, 500.0];
    let field = eikonal_solve(&grid, src)?;
    let mut err = 0.0f64;
    for j in 0..grid.nz {
        for i in 0..grid.nx {
            let r = distance(grid.node(i, j), src);
            if r > 0.0 {
                err = err.max((field.at(i, j) - r / c).abs() / (r / c));
            }
        }
    }
    Ok(Check { name: "eikonal_constant_rel_err", value: err, tolerance: 1e-2 })
}

/// Dot-product test `⟨Su, y⟩ = ⟨u, Sᵀy⟩` on seeded random vectors.
fn adjoint(seed: u64) -> Result<Check, CliError> {
    let w = Wavelet::mother(WaveletKind::Ricker, 1e-2, 8.0)?;
    let axis = TimeAxis::spanning(0.0, 20.0, 1e-2)?;
    let p = leading_term_trace(1.0, 9.0, &w, axis)?;
    let d = leading_term_trace(0.8, 10.0, &w, axis)?;
    let op = TraceOperator::new(&p, &d, None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..op.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let (lhs, rhs) = (dot(&op.apply(&u), &y), dot(&u, &op.adjoint(&y)));
    Ok(Check { name: "adjoint_rel_err", value: (lhs - rhs).abs() / lhs.abs().max(rhs.abs()), tolerance: 1e-10 })
}

fn desk(seed: u64) -> Result<Check, CliError> {
    let t = desk_penalty_check(8, seed, &[1e-3])?;
    let err = t.value(1e-3, "rel_err")?;
    Ok(Check { name: "desk_penalty_limit_rel_err", value: err, tolerance: 1e-2 })
}

pub fn run(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let mut checks = Vec::new();
    checks.extend(identity()?);
    checks.push(heisenberg()?);
    checks.push(eikonal()?);
    checks.push(adjoint(cfg.seed)?);
    checks.push(desk(cfg.seed)?);
    let mut csv = String::from("check,value,tolerance,pass\n");
    for c in &checks {
        println!("{} {} {:.3e} (tolerance {:.1e})", if c.pass() { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
        csv.push_str(&format!("{},{:.12e},{:.12e},{}\n", c.name, c.value, c.tolerance, c.pass()));
    }
    let outputs = vec![("selftest.csv".to_string(), csv)];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(outputs)
    } else {
        Err(Failure { outputs, error: CliError::Numerical(format!("failed checks: {}", failed.join(", "))) })
    }
}
