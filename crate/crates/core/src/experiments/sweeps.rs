use rayon::prelude::*;

use super::scenario::Scenario;
use super::table::SweepTable;
use crate::error::{invalid, Result};
use crate::filter::{fft_size, g_kernel, solve_on, FilterDiagnostics, FilterOptions};
use crate::objectives::{gather_diagnostics, weighted_tt_misfit};
use crate::signal::{apply_t, pulse_width};

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return invalid("empty λ list");
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
        return invalid(format!("λ must lie in (0, 1], got {l}"));
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("λ values must be strictly decreasing");
    }
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return invalid(format!("r must be positive, got {r}"));
    }
    Ok(())
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Fits every listed column that is positive throughout.
fn fit_all(table: &mut SweepTable, names: &[&str]) {
    if table.rows.len() < 4 {
        return;
    }
    for name in names {
        let _ = table.fit(name);
    }
}

/// `√(Σ residual²/Σ‖d‖²)` over a gather.
fn aggregate_residual(diag: &[(usize, FilterDiagnostics)]) -> f64 {
    let res: f64 = diag.iter().map(|(_, d)| d.residual_norm.powi(2)).sum();
    let data: f64 = diag.iter().map(|(_, d)| d.data_norm.powi(2)).sum();
    (res / data).sqrt()
}

/// Filter grid whose lag half-width is at least `64λ·l(w₁)`: the kernel's
/// tails decay on a scale proportional to λ, and the circular solution must
/// hold them for the width identity to be exact at large λ.
fn padded_options(scenario: &Scenario, lambda: f64) -> Result<FilterOptions> {
    let dt = scenario.axis().dt;
    let half = (64.0 * lambda * pulse_width(scenario.mother.trace())? / dt).ceil() as usize;
    Ok(FilterOptions { fft_len: Some(fft_size((2 * scenario.axis().n).max(2 * half + 1))), lag_window: None })
}

pub const LAMBDA_COLUMNS: [&str; 13] = [
    "sigma",
    "j_awi",
    "tt_misfit",
    "j_awi_err",
    "j_awi_rel_err",
    "identity_err",
    "lambda_j_mswi",
    "weighted_tt_misfit",
    "mswi_rel_err",
    "ratio_err",
    "norm_u",
    "filter_width",
    "residual_ratio",
];

/// AWI and MSWI against their travel-time limits along a λ sweep with `σ = rλ`.
/// Filters use a lag grid padded in proportion to λ.
///
/// `identity_err` is the largest relative deviation from
/// `ratio² = l(g)² + Δτ²`; `ratio_err` the largest `|ratio − |Δτ||`; `norm_u` and
/// `filter_width` are pair averages of `‖u‖` and the filter's RMS width about
/// its centroid; `residual_ratio` is the largest per-trace value.
pub fn lambda_sweep(scenario: &Scenario, lambdas: &[f64], r: f64) -> Result<SweepTable> {
    check_lambdas(lambdas)?;
    check_r(r)?;
    let dtau = scenario.delta_tau()?;
    let amps = scenario.amplitudes()?;
    let ids: Vec<usize> = scenario.geometry.pairs().iter().map(|p| p.id).collect();
    let ttm: f64 = dtau.iter().map(|d| d * d).sum();
    let wtt = weighted_tt_misfit(
        &scenario.medium,
        &scenario.medium_star,
        &scenario.geometry,
        &scenario.mother,
        r,
        &scenario.opts,
        &scenario.opts_star,
    )?;
    let mut table = SweepTable::new("lambda", &LAMBDA_COLUMNS);
    for &lambda in lambdas {
        let sigma = r * lambda;
        let (pred, obs) = scenario.gathers(lambda)?;
        let diag = gather_diagnostics(&pred, &obs, sigma, &padded_options(scenario, lambda)?)?;
        let w = scenario.mother.scaled(lambda)?;
        let floors: Vec<f64> = amps
            .par_iter()
            .map(|a| Ok(pulse_width(&g_kernel(&w, sigma / (a * a))?)?.powi(2)))
            .collect::<Result<_>>()?;
        let mut j_awi = 0.0;
        let mut j_mswi = 0.0;
        let mut identity_err: f64 = 0.0;
        let mut ratio_err: f64 = 0.0;
        for (k, (id, d)) in diag.iter().enumerate() {
            debug_assert_eq!(*id, ids[k]);
            j_awi += d.ratio * d.ratio;
            j_mswi += d.norm_tu * d.norm_tu;
            let expect = floors[k] + dtau[k] * dtau[k];
            identity_err = identity_err.max((d.ratio * d.ratio - expect).abs() / expect);
            ratio_err = ratio_err.max((d.ratio - dtau[k].abs()).abs());
        }
        let err = (j_awi - ttm).abs();
        table.push(
            lambda,
            vec![
                sigma,
                j_awi,
                ttm,
                err,
                err / ttm,
                identity_err,
                lambda * j_mswi,
                wtt,
                (lambda * j_mswi - wtt).abs() / wtt,
                ratio_err,
                mean(diag.iter().map(|(_, d)| d.norm_u)),
                mean(diag.iter().map(|(_, d)| d.width)),
                diag.iter().map(|(_, d)| d.residual_ratio).fold(0.0, f64::max),
            ],
        );
    }
    fit_all(&mut table, &["j_awi_err", "ratio_err", "norm_u", "filter_width"]);
    Ok(table)
}

/// Filtered-residual ratio against `σ/λ` at fixed λ. Notes record the `σ/λ`
/// where the aggregate ratio first reaches ½ (log-interpolated) and whether
/// the ratio is nondecreasing in σ.
pub fn sigma_coupling_sweep(scenario: &Scenario, lambda: f64, sigmas: &[f64]) -> Result<SweepTable> {
    check_lambdas(&[lambda])?;
    if sigmas.is_empty() || sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return invalid("σ values must be positive");
    }
    if sigmas.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("σ values must be strictly increasing");
    }
    let (pred, obs) = scenario.gathers(lambda)?;
    let rows: Vec<(f64, Vec<f64>)> = sigmas
        .par_iter()
        .map(|&sigma| {
            let diag = gather_diagnostics(&pred, &obs, sigma, &FilterOptions::default())?;
            let j_awi: f64 = diag.iter().map(|(_, d)| d.ratio * d.ratio).sum();
            let worst = diag.iter().map(|(_, d)| d.residual_ratio).fold(0.0, f64::max);
            let norm_u = mean(diag.iter().map(|(_, d)| d.norm_u));
            Ok((sigma / lambda, vec![sigma, aggregate_residual(&diag), worst, j_awi, norm_u]))
        })
        .collect::<Result<_>>()?;
    let mut table = SweepTable::new(
        "sigma_over_lambda",
        &["sigma", "residual_ratio", "residual_ratio_max", "j_awi", "norm_u"],
    );
    for (x, v) in rows {
        table.push(x, v);
    }
    let res = table.column("residual_ratio")?;
    let xs = table.xs();
    let monotone = res.windows(2).all(|w| w[1] >= w[0]);
    table.note("monotone", if monotone { 1.0 } else { 0.0 });
    if let Some(k) = res.windows(2).position(|w| w[0] < 0.5 && w[1] >= 0.5) {
        let f = (0.5 - res[k]) / (res[k + 1] - res[k]);
        table.note("crossing", (xs[k].ln() + f * (xs[k + 1].ln() - xs[k].ln())).exp());
    }
    Ok(table)
}

pub const REMAINDER_COLUMNS: [&str; 7] =
    ["sigma", "diff_norm", "diff_rel", "diff_t_norm", "diff_t_rel", "j_awi", "j_awi_err"];

/// Filters from full data against filters from leading-term data. `diff_rel`
/// is `‖u − u⁰‖/‖d‖` aggregated over pairs (root sum of squares), `diff_t_rel`
/// the same with `T` applied; `j_awi_err` is `|J_AWI − ΣΔτ²|` on full data.
pub fn remainder_effect(scenario: &Scenario, lambdas: &[f64], r: f64) -> Result<SweepTable> {
    check_lambdas(lambdas)?;
    check_r(r)?;
    let lead = scenario.leading_only();
    let ttm: f64 = scenario.delta_tau()?.iter().map(|d| d * d).sum();
    let mut table = SweepTable::new("lambda", &REMAINDER_COLUMNS);
    for &lambda in lambdas {
        let sigma = r * lambda;
        let (pred, obs) = scenario.gathers(lambda)?;
        let (pred0, obs0) = lead.gathers(lambda)?;
        let full = pred.zip(&obs)?;
        let bare = pred0.zip(&obs0)?;
        let terms: Vec<[f64; 4]> = full
            .par_iter()
            .zip(bare.par_iter())
            .map(|(&(_, p, d), &(_, p0, d0))| {
                let opts = FilterOptions::default();
                let (u, op) = solve_on(p, d, sigma, &opts)?;
                let (u0, _) = solve_on(p0, d0, sigma, &FilterOptions { fft_len: Some(op.len()), ..opts })?;
                let diff = u.trace.add_scaled(&u0.trace, -1.0)?;
                let diag = crate::filter::diagnostics_on(&u, &op)?;
                Ok([diff.norm_sq(), apply_t(&diff).norm_sq(), d.norm_sq(), diag.ratio * diag.ratio])
            })
            .collect::<Result<_>>()?;
        let sum = |k: usize| terms.iter().map(|t| t[k]).sum::<f64>();
        let (dn, dtn, data, j) = (sum(0).sqrt(), sum(1).sqrt(), sum(2).sqrt(), sum(3));
        table.push(lambda, vec![sigma, dn, dn / data, dtn, dtn / data, j, (j - ttm).abs()]);
    }
    fit_all(&mut table, &["diff_rel", "diff_t_rel", "j_awi_err"]);
    Ok(table)
}
