use crate::error::{invalid, Result};
use crate::forward::{model_gather, ArrivalSet, Gather, GatherOptions, RemainderSpec};
use crate::medium::{pair_travel_times, Geometry, MediumModel};
use crate::signal::{Spectrum, TimeAxis, Wavelet, WaveletKind};

/// Sample interval shared by the built-in scenarios.
pub const DEFAULT_DT: f64 = 1e-3;
/// Half support of the built-in mother wavelets, seconds.
pub const DEFAULT_HALF_SUPPORT: f64 = 8.0;

/// `{1, 1/2, …, 1/64}`.
pub fn default_lambdas() -> Vec<f64> {
    (0..7).map(|k| 0.5f64.powi(k)).collect()
}

/// `r = 1e-2·a_min²·max_ω|ŵ₁(ω)|²`, so `σ = rλ` sits two decades below the
/// weakest trace's peak power at every λ.
pub fn coupling_r(w1: &Wavelet, a_min: f64) -> Result<f64> {
    if !(a_min > 0.0) {
        return invalid(format!("amplitude must be positive, got {a_min}"));
    }
    let n = (4 * w1.trace().len()).next_power_of_two();
    let spec = Spectrum::of(w1.trace(), n)?;
    let peak = spec.coefficients.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    Ok(1e-2 * a_min * a_min * peak)
}

/// Predicted medium κ against observed medium κ* on one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub medium: MediumModel,
    pub medium_star: MediumModel,
    pub geometry: Geometry,
    pub mother: Wavelet,
    /// Options for predicted data.
    pub opts: GatherOptions,
    /// Options for observed data.
    pub opts_star: GatherOptions,
}

impl Scenario {
    pub fn new(
        medium: MediumModel,
        medium_star: MediumModel,
        geometry: Geometry,
        mother: Wavelet,
        opts: GatherOptions,
        opts_star: GatherOptions,
    ) -> Result<Self> {
        if opts.axis != opts_star.axis {
            return invalid("predicted and observed data must share a time axis");
        }
        if mother.lambda_scale() != 1.0 {
            return invalid("scenario needs the mother wavelet (λ = 1)");
        }
        if mother.dt() != opts.axis.dt {
            return invalid(format!("wavelet dt {} differs from axis dt {}", mother.dt(), opts.axis.dt));
        }
        Ok(Scenario { medium, medium_star, geometry, mother, opts, opts_star })
    }

    /// c = 2000 m/s against c* = 2100 m/s, four pairs with 18–22 km offsets,
    /// observed source 25% stronger than predicted.
    pub fn constant_media() -> Result<Self> {
        let geometry = Geometry::new([
            ([0.0, 0.0], [18_000.0, 0.0]),
            ([0.0, 0.0], [19_000.0, 2_500.0]),
            ([500.0, -1_000.0], [21_000.0, 1_000.0]),
            ([0.0, 1_500.0], [22_000.0, -500.0]),
        ])?;
        let axis = TimeAxis::spanning(0.0, 24.0, DEFAULT_DT)?;
        let opts = GatherOptions::new(axis);
        Scenario::new(
            MediumModel::constant(2000.0)?,
            MediumModel::constant(2100.0)?,
            geometry,
            Wavelet::mother(WaveletKind::Ricker, DEFAULT_DT, DEFAULT_HALF_SUPPORT)?,
            opts,
            GatherOptions { gain: 1.25, ..opts },
        )
    }

    /// `constant_media` with remainders on both sides; the observed one differs
    /// so the predicted remainder cannot absorb it.
    pub fn constant_media_with_remainder() -> Result<Self> {
        let mut s = Scenario::constant_media()?;
        let spec = RemainderSpec::default();
        s.opts.remainder = Some(spec);
        s.opts_star.remainder = Some(RemainderSpec { b0: 0.7 * spec.b0, scale_b: 1.5 * spec.scale_b, ..spec });
        Ok(s)
    }

    /// Four nearly equal offsets (15.0–15.3 km) in a 2000 m/s medium, so
    /// cycle skips line up across traces; both media start equal.
    pub fn cycle_skip() -> Result<Self> {
        let geometry = Geometry::new([
            ([0.0, 0.0], [15_000.0, 0.0]),
            ([0.0, 0.0], [15_100.0, 0.0]),
            ([0.0, 0.0], [15_200.0, 0.0]),
            ([0.0, 0.0], [15_300.0, 0.0]),
        ])?;
        let axis = TimeAxis::spanning(0.0, 12.0, DEFAULT_DT)?;
        let m = MediumModel::constant(2000.0)?;
        Scenario::new(
            m.clone(),
            m,
            geometry,
            Wavelet::mother(WaveletKind::Ricker, DEFAULT_DT, DEFAULT_HALF_SUPPORT)?,
            GatherOptions::new(axis),
            GatherOptions::new(axis),
        )
    }

    pub fn axis(&self) -> TimeAxis {
        self.opts.axis
    }

    pub fn with_medium(&self, medium: MediumModel) -> Scenario {
        Scenario { medium, ..self.clone() }
    }

    /// Same scenario with every remainder removed.
    pub fn leading_only(&self) -> Scenario {
        let mut s = self.clone();
        s.opts.remainder = None;
        s.opts_star.remainder = None;
        s
    }

    pub fn has_remainder(&self) -> bool {
        let nz = |o: &GatherOptions| o.remainder.is_some_and(|r| !r.is_zero());
        nz(&self.opts) || nz(&self.opts_star)
    }

    pub fn predicted(&self, lambda: f64) -> Result<Gather> {
        model_gather(&self.medium, &self.geometry, &self.mother.scaled(lambda)?, &self.opts)
    }

    pub fn observed(&self, lambda: f64) -> Result<Gather> {
        model_gather(&self.medium_star, &self.geometry, &self.mother.scaled(lambda)?, &self.opts_star)
    }

    /// Predicted and observed gathers at wavelength scale λ.
    pub fn gathers(&self, lambda: f64) -> Result<(Gather, Gather)> {
        Ok((self.predicted(lambda)?, self.observed(lambda)?))
    }

    /// `τ[κ] − τ[κ*]` per pair, in geometry order.
    pub fn delta_tau(&self) -> Result<Vec<f64>> {
        let t = pair_travel_times(&self.medium, &self.geometry)?;
        let ts = pair_travel_times(&self.medium_star, &self.geometry)?;
        Ok(t.iter().zip(&ts).map(|(a, b)| a - b).collect())
    }

    /// Predicted amplitude per pair, in geometry order.
    pub fn amplitudes(&self) -> Result<Vec<f64>> {
        self.geometry.pairs().iter().map(|p| self.opts.pair_amplitude(p)).collect()
    }

    /// Default coupling constant, set by the weakest predicted trace.
    pub fn default_r(&self) -> Result<f64> {
        let a_min = self.amplitudes()?.into_iter().fold(f64::INFINITY, f64::min);
        coupling_r(&self.mother, a_min)
    }
}

/// Two explicit arrival sets for a single trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalScenario {
    pub predicted: ArrivalSet,
    pub observed: ArrivalSet,
    pub mother: Wavelet,
    pub axis: TimeAxis,
}

impl ArrivalScenario {
    /// Equal first arrivals at 10 s; second arrivals (half amplitude, one
    /// caustic) at 11 s predicted and `11 + separation` s observed.
    pub fn two_arrival(separation: f64) -> Result<Self> {
        use crate::forward::Arrival;
        let set = |t1: f64| {
            ArrivalSet::new(vec![
                Arrival { amplitude: 1.0, tau: 10.0, caustic_index: 0 },
                Arrival { amplitude: 0.5, tau: t1, caustic_index: 1 },
            ])
        };
        Ok(ArrivalScenario {
            predicted: set(11.0)?,
            observed: set(11.0 + separation)?,
            mother: Wavelet::mother(WaveletKind::Ricker, DEFAULT_DT, DEFAULT_HALF_SUPPORT)?,
            axis: TimeAxis::spanning(0.0, 24.0, DEFAULT_DT)?,
        })
    }

    pub fn default_r(&self) -> Result<f64> {
        coupling_r(&self.mother, self.predicted.first().amplitude)
    }
}
