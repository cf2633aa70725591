use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::eikonal::{eikonal_solve, TravelTimeField};
use super::geometry::Geometry;
use super::model::{distance, MediumKind, MediumModel, Position};
use crate::error::{AwiError, Result};

/// First-arrival travel time between two points.
///
/// Analytic media use closed forms. Grid media average the two one-sided
/// eikonal solutions (source at `xs` read at `xr`, and the reverse), which makes
/// the estimate exactly reciprocal.
pub fn travel_time(medium: &MediumModel, xs: Position, xr: Position) -> Result<f64> {
    if distance(xs, xr) == 0.0 {
        return Err(AwiError::InvalidArgument("source and receiver coincide".into()));
    }
    match &medium.kind {
        MediumKind::Constant { c } => Ok(distance(xs, xr) / c),
        MediumKind::LinearGradient { g, .. } => {
            let cs = medium.velocity(xs)?;
            let cr = medium.velocity(xr)?;
            Ok(gradient_travel_time(cs, cr, *g, distance(xs, xr)))
        }
        MediumKind::Grid(grid) => {
            for p in [xs, xr] {
                if !grid.contains(p) {
                    return Err(AwiError::Domain(format!("point {p:?} lies outside the grid")));
                }
            }
            let forward = eikonal_solve(grid, xs)?.time_at(xr)?;
            let backward = eikonal_solve(grid, xr)?.time_at(xs)?;
            Ok(0.5 * (forward + backward))
        }
    }
}

/// Closed-form time in `c = c0 + g·z`: `(1/|g|)·arccosh(1 + g²r²/(2 c_s c_r))`.
pub fn gradient_travel_time(cs: f64, cr: f64, g: f64, r: f64) -> f64 {
    if g == 0.0 {
        return r / cs;
    }
    // acosh(1 + x) loses precision for tiny x; use the log1p form.
    let x = g * g * r * r / (2.0 * cs * cr);
    (x + (x * (x + 2.0)).sqrt()).ln_1p() / g.abs()
}

/// Travel times for every pair, caching one eikonal field per distinct point on grid media.
pub fn pair_travel_times(medium: &MediumModel, geometry: &Geometry) -> Result<Vec<f64>> {
    match &medium.kind {
        MediumKind::Grid(grid) => {
            let mut cache: HashMap<[u64; 2], TravelTimeField> = HashMap::new();
            let mut field = |p: Position| -> Result<TravelTimeField> {
                let key = [p[0].to_bits(), p[1].to_bits()];
                if let Some(f) = cache.get(&key) {
                    return Ok(f.clone());
                }
                let f = eikonal_solve(grid, p)?;
                cache.insert(key, f.clone());
                Ok(f)
            };
            geometry
                .pairs()
                .iter()
                .map(|p| {
                    let fwd = field(p.source)?.time_at(p.receiver)?;
                    let bwd = field(p.receiver)?.time_at(p.source)?;
                    Ok(0.5 * (fwd + bwd))
                })
                .collect()
        }
        _ => geometry
            .pairs()
            .iter()
            .map(|p| travel_time(medium, p.source, p.receiver))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AmplitudeModel {
    /// `1/(4πr)`, the homogeneous 3D geometric spreading factor.
    Spherical,
    #[default]
    Unit,
}

/// Default bound `A` on `|log a|`.
pub const DEFAULT_LOG_AMPLITUDE_BOUND: f64 = 30.0;

/// Geometric amplitude for a pair, clamped so that `|log a| < bound`.
pub fn amplitude(xs: Position, xr: Position, model: AmplitudeModel, bound: f64) -> Result<f64> {
    let r = distance(xs, xr);
    if r == 0.0 {
        return Err(AwiError::InvalidArgument("source and receiver coincide".into()));
    }
    if !(bound > 0.0) {
        return Err(AwiError::InvalidArgument(format!("amplitude bound must be positive, got {bound}")));
    }
    let a = match model {
        AmplitudeModel::Spherical => 1.0 / (4.0 * PI * r),
        AmplitudeModel::Unit => 1.0,
    };
    let limit = bound * (1.0 - 1e-12);
    Ok(a.ln().clamp(-limit, limit).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::model::Axis;

    #[test]
    fn constant_medium_time() {
        let m = MediumModel::constant(2000.0).unwrap();
        assert_eq!(travel_time(&m, [0.0, 0.0], [1000.0, 0.0]).unwrap(), 0.5);
        assert!(travel_time(&m, [1.0, 1.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn gradient_formula_reduces_to_constant() {
        let t = gradient_travel_time(2000.0, 2000.0, 1e-9, 1000.0);
        assert!((t - 0.5).abs() < 1e-9);
        assert_eq!(gradient_travel_time(2000.0, 2000.0, 0.0, 1000.0), 0.5);
        let m = MediumModel::linear_gradient(1500.0, 0.5, Axis::Z).unwrap();
        let a = travel_time(&m, [0.0, 100.0], [900.0, 700.0]).unwrap();
        let b = travel_time(&m, [900.0, 700.0], [0.0, 100.0]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn velocity_scaling_is_exact_for_analytic_media() {
        let m = MediumModel::linear_gradient(1500.0, 0.5, Axis::Z).unwrap();
        let (xs, xr) = ([0.0, 100.0], [2000.0, 500.0]);
        let t = travel_time(&m, xs, xr).unwrap();
        let t2 = travel_time(&m.scaled(1.7).unwrap(), xs, xr).unwrap();
        assert!((t2 - t / 1.7).abs() < 1e-14);
    }

    #[test]
    fn amplitude_models() {
        let r = 1.0 / (4.0 * PI);
        let a = amplitude([0.0, 0.0], [r, 0.0], AmplitudeModel::Spherical, 10.0).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        assert_eq!(amplitude([0.0, 0.0], [5.0, 0.0], AmplitudeModel::Unit, 1.0).unwrap(), 1.0);
        let a1 = amplitude([0.0, 0.0], [3.0, 0.0], AmplitudeModel::Spherical, 10.0).unwrap();
        let a2 = amplitude([0.0, 0.0], [6.0, 0.0], AmplitudeModel::Spherical, 10.0).unwrap();
        assert!((a1 / a2 - 2.0).abs() < 1e-12);
        let clamped = amplitude([0.0, 0.0], [1e9, 0.0], AmplitudeModel::Spherical, 2.0).unwrap();
        assert!(clamped > (-2.0f64).exp() && clamped < 2.0f64.exp());
        assert!(amplitude([0.0, 0.0], [0.0, 0.0], AmplitudeModel::Unit, 1.0).is_err());
    }
}
