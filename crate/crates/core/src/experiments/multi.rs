use rayon::prelude::*;

use super::scenario::ArrivalScenario;
use super::table::SweepTable;
use crate::error::{invalid, Result};
use crate::filter::{filter_diagnostics, solve_filter};
use crate::forward::{multi_arrival_trace, ArrivalSet};
use crate::signal::{envelope, peak_time, pulse_width, Trace};

/// `(τ₁* − τ₀, τ₁ − τ₀*)`, where the first-order side lobes of the filter sit.
pub fn expected_lobes(predicted: &ArrivalSet, observed: &ArrivalSet) -> Result<(f64, f64)> {
    let (p, d) = (predicted.arrivals(), observed.arrivals());
    if p.len() < 2 || d.len() < 2 {
        return invalid("side lobes need two arrivals on each side");
    }
    Ok((d[1].tau - p[0].tau, p[1].tau - d[0].tau))
}

/// Envelope peak of `u` within `half` of `lag`.
fn lobe(env: &Trace, lag: f64, half: f64) -> f64 {
    peak_time(env, lag - half, lag + half).unwrap_or(f64::NAN)
}

struct Point {
    j_awi: f64,
    filter: Trace,
}

fn solve_point(scn: &ArrivalScenario, lambda: f64, r: f64, observed: &ArrivalSet) -> Result<Point> {
    let w = scn.mother.scaled(lambda)?;
    let p = multi_arrival_trace(&scn.predicted, &w, scn.axis)?;
    let d = multi_arrival_trace(observed, &w, scn.axis)?;
    let u = solve_filter(&p, &d, r * lambda)?;
    let diag = filter_diagnostics(&u, &p, &d)?;
    Ok(Point { j_awi: diag.ratio * diag.ratio, filter: u.trace })
}

/// J_AWI on two-arrival data along a λ sweep, with the located side lobes.
/// Lobes are searched within 45% of the lobe separation (or 0.1 s when the
/// lobes coincide). A row is `resolved` when the lobes sit at least two RMS
/// wavelet widths apart; notes hold the smallest J_AWI overall and, over the
/// resolved rows, the smallest value and the spread `1 − min/max`.
pub fn multi_arrival_demo(scn: &ArrivalScenario, lambdas: &[f64], r: f64) -> Result<SweepTable> {
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
        return invalid("λ values must lie in (0, 1]");
    }
    let (la, lb) = expected_lobes(&scn.predicted, &scn.observed)?;
    let half = if la == lb { 0.1 } else { 0.45 * (la - lb).abs() };
    let points: Vec<Point> = lambdas
        .par_iter()
        .map(|&l| solve_point(scn, l, r, &scn.observed))
        .collect::<Result<_>>()?;
    let mut table = SweepTable::new(
        "lambda",
        &[
            "sigma",
            "j_awi",
            "rms_width",
            "resolved",
            "lobe_a",
            "lobe_a_expected",
            "lobe_a_err",
            "lobe_b",
            "lobe_b_expected",
            "lobe_b_err",
        ],
    );
    let separation = (la - lb).abs();
    for (&lambda, pt) in lambdas.iter().zip(&points) {
        let env = envelope(&pt.filter);
        let (a, b) = (lobe(&env, la, half), lobe(&env, lb, half));
        let width = pulse_width(scn.mother.scaled(lambda)?.trace())?;
        let resolved = if 2.0 * width <= separation { 1.0 } else { 0.0 };
        table.push(
            lambda,
            vec![r * lambda, pt.j_awi, width, resolved, a, la, (a - la).abs(), b, lb, (b - lb).abs()],
        );
    }
    let j = table.column("j_awi")?;
    let res = table.column("resolved")?;
    table.note("floor", j.iter().cloned().fold(f64::INFINITY, f64::min));
    let kept: Vec<f64> = j.iter().zip(&res).filter(|(_, r)| **r > 0.0).map(|(v, _)| *v).collect();
    if !kept.is_empty() {
        let hi = kept.iter().cloned().fold(0.0, f64::max);
        let lo = kept.iter().cloned().fold(f64::INFINITY, f64::min);
        table.note("resolved_floor", lo);
        table.note("resolved_spread", 1.0 - lo / hi);
    }
    Ok(table)
}

/// J_AWI at fixed λ as the observed second arrival moves away from the
/// predicted one by each of `separations` (seconds).
pub fn multi_arrival_onset(scn: &ArrivalScenario, lambda: f64, r: f64, separations: &[f64]) -> Result<SweepTable> {
    let base = scn.observed.arrivals();
    if base.len() < 2 {
        return invalid("onset sweep needs two observed arrivals");
    }
    let t1 = scn.predicted.arrivals().get(1).map(|a| a.tau).ok_or_else(|| {
        crate::AwiError::InvalidArgument("onset sweep needs two predicted arrivals".into())
    })?;
    let rows: Vec<(f64, f64)> = separations
        .par_iter()
        .map(|&s| {
            let mut arr = base.to_vec();
            arr[1].tau = t1 + s;
            let obs = ArrivalSet::new(arr)?;
            Ok((s, solve_point(scn, lambda, r, &obs)?.j_awi))
        })
        .collect::<Result<_>>()?;
    let mut table = SweepTable::new("separation", &["j_awi"]);
    for (s, j) in rows {
        table.push(s, vec![j]);
    }
    table.note("lambda", lambda);
    table.note("rms_width", pulse_width(scn.mother.scaled(lambda)?.trace())?);
    Ok(table)
}
