use awi_core::filter::{
    filter_diagnostics, g_kernel, solve_filter, solve_filter_with, FilterOptions, TraceOperator,
};
use awi_core::forward::leading_term_trace;
use awi_core::signal::{delay_onto, pulse_width, TimeAxis, Trace, Wavelet, WaveletKind};
use awi_core::AwiError;

const DT: f64 = 1e-3;

fn mother() -> Wavelet {
    Wavelet::mother(WaveletKind::Ricker, DT, 8.0).unwrap()
}

fn axis() -> TimeAxis {
    TimeAxis::spanning(0.0, 16.0, DT).unwrap()
}

/// Water level `r = ε·max|ŵ₁|²` for unit amplitudes.
fn default_r() -> f64 {
    let w = mother();
    let p = leading_term_trace(1.0, 8.0, &w, axis()).unwrap();
    let op = TraceOperator::new(&p, &p, None).unwrap();
    1e-2 * op.peak_power()
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>()
}

/// With predicted = observed the filter tends to a δ on the wavelet's band: it
/// reproduces the wavelet under convolution, peaks at lag 0 and is centred there.
/// Its integral is `ĝ(0) = 0` for every σ because the wavelet has zero mean.
#[test]
fn identity_filter_tends_to_band_limited_delta() {
    let w = mother().scaled(0.125).unwrap();
    let p = leading_term_trace(1.0, 6.0, &w, axis()).unwrap();
    let mut last = f64::INFINITY;
    for sigma in [1e-2, 1e-4, 1e-6] {
        let u = solve_filter(&p, &p, sigma * default_r()).unwrap();
        let diag = filter_diagnostics(&u, &p, &p).unwrap();
        assert!(diag.residual_ratio < last, "sigma={sigma}");
        last = diag.residual_ratio;
        assert!(diag.centroid.abs() < 1e-12);
        assert!(u.trace.integral().abs() < 1e-9 * u.trace.norm_l1());
        let s = u.trace.samples();
        let centre = s.len() / 2;
        assert!(s.iter().all(|v| v.abs() <= s[centre]));
    }
    assert!(last < 1e-3, "{last}");
}

#[test]
fn leading_term_filter_is_shifted_kernel() {
    let lambda = 1.0 / 16.0;
    let w = mother().scaled(lambda).unwrap();
    let (a, a_star, tau, tau_star) = (0.8, 1.3, 7.0, 6.6543);
    let p = leading_term_trace(a, tau, &w, axis()).unwrap();
    let d = leading_term_trace(a_star, tau_star, &w, axis()).unwrap();
    let sigma = default_r() * lambda;
    let u = solve_filter(&p, &d, sigma).unwrap();
    let g = g_kernel(&w, sigma / (a * a)).unwrap();
    let expect = delay_onto(&g.scaled(a_star / a), tau_star - tau, u.trace.len(), u.trace.t0()).unwrap();
    let peak = u.trace.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = u
        .trace
        .samples()
        .iter()
        .zip(expect.samples())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(err <= 1e-8 * peak, "{err:e} vs peak {peak:e}");
}

#[test]
fn filter_norm_obeys_young_bound() {
    let w = mother().scaled(0.25).unwrap();
    let p = leading_term_trace(1.0, 7.0, &w, axis()).unwrap();
    let d = leading_term_trace(0.7, 7.3, &w, axis()).unwrap();
    // ‖u‖ ≤ ‖Sᵀd‖/σ ≤ ‖p‖_{L¹}‖d‖/σ, with p = ∂_t f for unit density.
    for sigma in [1e-3, 1e-1, 10.0, 1e3] {
        let u = solve_filter(&p, &d, sigma).unwrap();
        assert!(u.trace.norm() <= p.norm_l1() * d.norm() / sigma);
    }
}

#[test]
fn normal_equation_and_equivariances() {
    let w = mother().scaled(0.125).unwrap();
    let p = leading_term_trace(1.0, 7.0, &w, axis()).unwrap();
    let d = leading_term_trace(1.1, 7.4, &w, axis()).unwrap();
    let sigma = default_r() * 0.125;
    let u = solve_filter(&p, &d, sigma).unwrap();
    let op = TraceOperator::new(&p, &d, Some(u.fft_len)).unwrap();
    let lhs = op.normal(u.trace.samples(), sigma);
    let rhs = op.rhs();
    let res: f64 = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(res <= 1e-8 * scale, "{res:e}");

    let base = filter_diagnostics(&u, &p, &d).unwrap();
    assert!(base.edge_fraction < 0.01);

    let u10 = solve_filter(&p, &d.scaled(10.0), sigma).unwrap();
    for (a, b) in u.trace.samples().iter().zip(u10.trace.samples()) {
        assert!((10.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-12 * base.norm_u);
    }
    let d10 = filter_diagnostics(&u10, &p, &d.scaled(10.0)).unwrap();
    assert!((d10.ratio - base.ratio).abs() <= 1e-12 * base.ratio);

    // Delaying the observed trace by Δ moves the centroid by Δ and adds to ratio².
    let shift = 0.1234;
    let ds = leading_term_trace(1.1, 7.4 + shift, &w, axis()).unwrap();
    let us = solve_filter(&p, &ds, sigma).unwrap();
    let moved = filter_diagnostics(&us, &p, &ds).unwrap();
    assert!((moved.centroid - base.centroid - shift).abs() < 1e-6);
    let predicted = base.ratio.powi(2) + 2.0 * shift * base.centroid + shift * shift;
    assert!((moved.ratio.powi(2) - predicted).abs() <= 1e-6 * predicted);
}

#[test]
fn diagnostics_follow_kernel_width_identity() {
    let lambda = 0.125;
    let w = mother().scaled(lambda).unwrap();
    let sigma = default_r() * lambda;
    let a = 0.9;
    let p = leading_term_trace(a, 8.0, &w, axis()).unwrap();
    let lg = pulse_width(&g_kernel(&w, sigma / (a * a)).unwrap()).unwrap();
    for dtau in [0.0, 0.05, 0.1, -0.2] {
        let d = leading_term_trace(a, 8.0 + dtau, &w, axis()).unwrap();
        let u = solve_filter(&p, &d, sigma).unwrap();
        let diag = filter_diagnostics(&u, &p, &d).unwrap();
        let expect = lg * lg + dtau * dtau;
        assert!((diag.ratio.powi(2) - expect).abs() <= 1e-6 * expect, "Δτ={dtau}");
        assert!((diag.width - lg).abs() <= 1e-6 * lg);
        assert!(diag.residual_ratio <= 0.5);
    }
}

#[test]
fn kernel_properties_and_scaling() {
    let w1 = mother();
    let r = default_r();
    let big = g_kernel(&w1.scaled(0.5).unwrap(), 1e6).unwrap();
    let even_err = big
        .samples()
        .iter()
        .zip(big.samples().iter().rev())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert_eq!(even_err, 0.0);
    // |ĝ| ≤ ‖ŵ‖²_∞/μ bounds the kernel norm through Parseval.
    let wp = TraceOperator::new(w1.scaled(0.5).unwrap().trace(), w1.scaled(0.5).unwrap().trace(), None)
        .unwrap()
        .peak_power();
    assert!(big.norm() <= wp / 1e6 * (2.0 * big.t_end()).sqrt());

    let lambdas: Vec<f64> = (0..6).map(|k| 0.5f64.powi(k)).collect();
    let (mut norms, mut widths) = (vec![], vec![]);
    for &l in &lambdas {
        let g = g_kernel(&w1.scaled(l).unwrap(), r * l).unwrap();
        norms.push(l * g.norm_sq());
        widths.push(pulse_width(&g).unwrap());
    }
    for n in &norms {
        assert!((n - norms[0]).abs() <= 1e-3 * norms[0], "{norms:?}");
    }
    let s = fit_slope(&lambdas, &widths);
    assert!((s - 1.0).abs() <= 0.1, "{s}");
}

#[test]
fn filter_norm_and_width_scale_with_lambda() {
    let w1 = mother();
    let r = default_r();
    let lambdas: Vec<f64> = (0..7).map(|k| 0.5f64.powi(k)).collect();
    let (mut norms, mut widths) = (vec![], vec![]);
    for &l in &lambdas {
        let w = w1.scaled(l).unwrap();
        let ax = TimeAxis::spanning(0.0, 20.0, DT).unwrap();
        let p = leading_term_trace(1.0, 8.5, &w, ax).unwrap();
        let d = leading_term_trace(1.0, 8.8, &w, ax).unwrap();
        let u = solve_filter(&p, &d, r * l).unwrap();
        let diag = filter_diagnostics(&u, &p, &d).unwrap();
        norms.push(diag.norm_u);
        widths.push(diag.width);
    }
    let s = fit_slope(&lambdas, &norms);
    assert!((s + 0.5).abs() <= 0.05, "{s}");
    let s = fit_slope(&lambdas, &widths);
    assert!((s - 1.0).abs() <= 0.1, "{s}");
}

#[test]
fn lag_window_reports_dropped_energy() {
    let w = mother().scaled(0.25).unwrap();
    let p = leading_term_trace(1.0, 7.0, &w, axis()).unwrap();
    let d = leading_term_trace(1.0, 7.2, &w, axis()).unwrap();
    let opts = FilterOptions { fft_len: None, lag_window: Some(2.0) };
    let u = solve_filter_with(&p, &d, default_r() * 0.25, &opts).unwrap();
    assert!((u.trace.t0() + 2.0).abs() < 1e-9 && (u.trace.t_end() - 2.0).abs() < 1e-9);
    assert!(u.outside_energy > 0.0 && u.outside_energy < 0.05);
    assert!(filter_diagnostics(&u, &p, &d).is_ok());
}

#[test]
fn error_cases() {
    let w = mother().scaled(0.5).unwrap();
    let p = leading_term_trace(1.0, 7.0, &w, axis()).unwrap();
    let z = axis().zeros();
    assert!(matches!(solve_filter(&p, &p, 0.0), Err(AwiError::InvalidArgument(_))));
    assert!(matches!(solve_filter(&p, &p, -1.0), Err(AwiError::InvalidArgument(_))));
    assert!(matches!(solve_filter(&z, &p, 1.0), Err(AwiError::DegenerateOperator(_))));
    assert!(matches!(g_kernel(&w, 0.0), Err(AwiError::InvalidArgument(_))));
    let u = solve_filter(&p, &z, 1.0).unwrap();
    assert!(matches!(filter_diagnostics(&u, &p, &z), Err(AwiError::UndefinedRatio(_))));
    let other = Trace::zeros(10, 2e-3, 0.0).unwrap();
    assert!(solve_filter(&p, &other, 1.0).is_err());
}
