use crate::error::Result;
use crate::filter::g_kernel;
use crate::forward::GatherOptions;
use crate::medium::{pair_travel_times, Geometry, MediumModel};
use crate::signal::Wavelet;

/// `Σ |τ[κ] − τ[κ*]|²` over the pairs.
pub fn travel_time_misfit(medium: &MediumModel, medium_star: &MediumModel, geometry: &Geometry) -> Result<f64> {
    let t = pair_travel_times(medium, geometry)?;
    let ts = pair_travel_times(medium_star, geometry)?;
    Ok(t.iter().zip(&ts).map(|(a, b)| (a - b).powi(2)).sum())
}

/// `W = (a*/a)²·‖g_{1, r/a²}‖²`, the per-pair weight of the MSWI limit.
pub fn misfit_weight(a: f64, a_star: f64, w1: &Wavelet, r: f64) -> Result<f64> {
    let g = g_kernel(w1, r / (a * a))?;
    Ok((a_star / a).powi(2) * g.norm_sq())
}

/// `Σ W·Δτ²` with the amplitudes each medium's gather options assign to a pair.
pub fn weighted_tt_misfit(
    medium: &MediumModel,
    medium_star: &MediumModel,
    geometry: &Geometry,
    w1: &Wavelet,
    r: f64,
    opts: &GatherOptions,
    opts_star: &GatherOptions,
) -> Result<f64> {
    let t = pair_travel_times(medium, geometry)?;
    let ts = pair_travel_times(medium_star, geometry)?;
    let mut total = 0.0;
    for ((pair, a), b) in geometry.pairs().iter().zip(&t).zip(&ts) {
        let w = misfit_weight(opts.pair_amplitude(pair)?, opts_star.pair_amplitude(pair)?, w1, r)?;
        total += w * (a - b).powi(2);
    }
    Ok(total)
}
