use std::path::{Path, PathBuf};

use awi_core::experiments::{default_lambdas, ArrivalScenario, Scenario, DEFAULT_DT, DEFAULT_HALF_SUPPORT};
use awi_core::forward::{Arrival, ArrivalSet, GatherOptions, RemainderSpec};
use awi_core::io;
use awi_core::medium::{AmplitudeModel, Axis, Geometry, MediumModel, DEFAULT_LOG_AMPLITUDE_BOUND};
use awi_core::signal::{TimeAxis, Wavelet, WaveletKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run needs. Relative paths are resolved against the config
/// file's directory at load time, so the echoed copy in a manifest is
/// self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_wavelet")]
    pub wavelet: WaveletKind,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Half support of the λ = 1 wavelet, s.
    #[serde(default = "default_half_support")]
    pub half_support: f64,
    #[serde(default)]
    pub t_min: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Coupling constant in σ = rλ; derived from the weakest trace when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Explicit σ per entry of `lambdas`, replacing rλ.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigmas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium_star: Option<MediumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometrySpec>,
    #[serde(default)]
    pub gather: GatherSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remainder: Option<RemainderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remainder_star: Option<RemainderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrivals: Option<ArrivalConfig>,
    #[serde(default)]
    pub sigma_sweep: SigmaSweepConfig,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub descent: DescentConfig,
    #[serde(default)]
    pub multi: MultiConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MediumSpec {
    Constant { c: f64 },
    Gradient { c0: f64, g: f64, axis: Axis },
    /// Velocity grid file (header line, values line, nz rows of nx).
    Grid { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    /// `src_x,src_z,rcv_x,rcv_z` CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    /// Inline `[src_x, src_z, rcv_x, rcv_z]` rows.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GatherSpec {
    pub amplitude: AmplitudeModel,
    pub amplitude_bound: f64,
    pub rho: f64,
    /// Source strength for predicted data.
    pub gain: f64,
    /// Source strength for observed data.
    pub gain_star: f64,
}

impl Default for GatherSpec {
    fn default() -> Self {
        GatherSpec {
            amplitude: AmplitudeModel::Unit,
            amplitude_bound: DEFAULT_LOG_AMPLITUDE_BOUND,
            rho: 1.0,
            gain: 1.0,
            gain_star: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrivalConfig {
    pub predicted: Vec<Arrival>,
    pub observed: Vec<Arrival>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SigmaSweepConfig {
    pub lambda: f64,
    /// σ/λ values, increasing.
    pub ratios: Vec<f64>,
}

impl Default for SigmaSweepConfig {
    fn default() -> Self {
        SigmaSweepConfig { lambda: 0.125, ratios: (0..13).map(|k| 1e-6 * 10f64.powf(0.75 * k as f64)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltyConfig {
    pub desk_size: usize,
    pub alphas: Vec<f64>,
    pub lambda: f64,
    /// α in units of the natural scale of each run.
    pub alpha_factors: Vec<f64>,
    pub epsilons: Vec<f64>,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            desk_size: 8,
            alphas: vec![1e-1, 1e-2, 1e-3],
            lambda: 0.125,
            alpha_factors: vec![1e-1, 1e-2, 1e-3],
            epsilons: vec![1.0 / 24.0, 1.0 / 96.0, 1.0 / 384.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub family: String,
    /// Relative half width of the scan around the true parameter.
    pub half_width: f64,
    pub points: usize,
    /// Defaults to the smallest configured λ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { family: "velocity_scale".into(), half_width: 0.1, points: 201, lambda: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DescentConfig {
    /// Relative start errors, `p₀ = truth·(1 + e)`.
    pub start_errors: Vec<f64>,
    /// Extra starts drawn uniformly from ±`spread` with the run seed.
    pub random_starts: usize,
    pub spread: f64,
    pub step: f64,
    pub fd_step: f64,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub max_move: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            start_errors: vec![-0.08],
            random_starts: 0,
            spread: 0.1,
            step: 2e-3,
            fd_step: 1e-4,
            max_iter: 100,
            grad_tol: 1e-6,
            max_move: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiConfig {
    /// Second-arrival separations for the onset sweep; empty skips it.
    pub separations: Vec<f64>,
    pub onset_lambda: f64,
}

impl Default for MultiConfig {
    fn default() -> Self {
        MultiConfig { separations: Vec::new(), onset_lambda: 0.0625 }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_wavelet() -> WaveletKind {
    WaveletKind::Ricker
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_half_support() -> f64 {
    DEFAULT_HALF_SUPPORT
}
fn default_t_max() -> f64 {
    24.0
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config deserializes")
    }
}

/// Reads a config or a manifest (whose `[config]` table is used), applying
/// `key=value` overrides (dotted keys, TOML values) before deserializing.
pub fn load(path: &Path, sets: &[String]) -> Result<ScenarioConfig, CliError> {
    let text = io::read_text(path)?;
    let mut value: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if value.contains_key("run") {
        value = match value.remove("config") {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(CliError::Validation(format!("{}: manifest has no [config] table", path.display()))),
        };
    }
    apply_sets(&mut value, sets)?;
    let mut cfg: ScenarioConfig = toml::Value::Table(value)
        .try_into()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.resolve_paths(&base);
    Ok(cfg)
}

/// Config from overrides alone, on top of the defaults.
pub fn from_sets(sets: &[String]) -> Result<ScenarioConfig, CliError> {
    let mut value = toml::Table::new();
    apply_sets(&mut value, sets)?;
    let mut cfg: ScenarioConfig =
        toml::Value::Table(value).try_into().map_err(|e| CliError::Validation(e.to_string()))?;
    cfg.resolve_paths(&std::env::current_dir().unwrap_or_default());
    Ok(cfg)
}

fn apply_sets(table: &mut toml::Table, sets: &[String]) -> Result<(), CliError> {
    for set in sets {
        let (key, raw) =
            set.split_once('=').ok_or_else(|| CliError::Validation(format!("override '{set}' is not key=value")))?;
        let value = parse_value(raw.trim());
        let parts: Vec<&str> = key.trim().split('.').collect();
        let mut cur = &mut *table;
        for part in &parts[..parts.len() - 1] {
            let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            cur = entry
                .as_table_mut()
                .ok_or_else(|| CliError::Validation(format!("override '{key}': '{part}' is not a table")))?;
        }
        cur.insert(parts[parts.len() - 1].to_string(), value);
    }
    Ok(())
}

/// A TOML value, or the raw text as a string.
fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn absolute(base: &Path, p: &Path) -> PathBuf {
    let joined = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    std::path::absolute(&joined).unwrap_or(joined)
}

impl ScenarioConfig {
    fn resolve_paths(&mut self, base: &Path) {
        for m in [&mut self.medium, &mut self.medium_star].into_iter().flatten() {
            if let MediumSpec::Grid { file } = m {
                *file = absolute(base, file);
            }
        }
        if let Some(GeometrySpec { file: Some(f), .. }) = &mut self.geometry {
            *f = absolute(base, f);
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
            return bad(format!("λ values must lie in (0, 1], got {:?}", self.lambdas));
        }
        if let Some(r) = self.r {
            if !(r > 0.0) || !r.is_finite() {
                return bad(format!("r must be positive, got {r}"));
            }
        }
        if !self.sigmas.is_empty() && self.sigmas.len() != self.lambdas.len() {
            return bad(format!("{} σ overrides for {} λ values", self.sigmas.len(), self.lambdas.len()));
        }
        if self.sigmas.iter().any(|s| !(*s > 0.0)) {
            return bad("σ overrides must be positive".into());
        }
        for m in [&self.medium, &self.medium_star].into_iter().flatten() {
            if let MediumSpec::Grid { file } = m {
                require_file(file)?;
            }
        }
        if let Some(g) = &self.geometry {
            match (&g.file, g.pairs.is_empty()) {
                (Some(f), true) => require_file(f)?,
                (None, false) => {}
                _ => return bad("geometry needs exactly one of 'file' or 'pairs'".into()),
            }
        }
        Ok(())
    }

    pub fn axis(&self) -> Result<TimeAxis, CliError> {
        Ok(TimeAxis::spanning(self.t_min, self.t_max, self.dt)?)
    }

    pub fn mother(&self) -> Result<Wavelet, CliError> {
        Ok(Wavelet::mother(self.wavelet, self.dt, self.half_support)?)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let (Some(m), Some(ms), Some(g)) = (&self.medium, &self.medium_star, &self.geometry) else {
            return Err(CliError::Validation("this command needs [medium], [medium_star] and [geometry]".into()));
        };
        let geometry = match &g.file {
            Some(f) => io::read_geometry(f)?,
            None => Geometry::new(g.pairs.iter().map(|p| ([p[0], p[1]], [p[2], p[3]])))?,
        };
        let axis = self.axis()?;
        let gs = self.gather;
        let opts = GatherOptions {
            remainder: self.remainder,
            amplitude_model: gs.amplitude,
            amplitude_bound: gs.amplitude_bound,
            rho: gs.rho,
            gain: gs.gain,
            ..GatherOptions::new(axis)
        };
        let opts_star = GatherOptions { remainder: self.remainder_star, gain: gs.gain_star, ..opts };
        Ok(Scenario::new(medium(m, gs.rho)?, medium(ms, gs.rho)?, geometry, self.mother()?, opts, opts_star)?)
    }

    /// Configured arrival sets, or the built-in pair separated by 0.2 s.
    pub fn arrival_scenario(&self) -> Result<ArrivalScenario, CliError> {
        let base = ArrivalScenario::two_arrival(0.2)?;
        let (predicted, observed) = match &self.arrivals {
            Some(a) => (ArrivalSet::new(a.predicted.clone())?, ArrivalSet::new(a.observed.clone())?),
            None => (base.predicted, base.observed),
        };
        Ok(ArrivalScenario { predicted, observed, mother: self.mother()?, axis: self.axis()? })
    }

    /// σ for entry `k` of `lambdas`.
    pub fn sigma(&self, k: usize, r: f64) -> f64 {
        self.sigmas.get(k).copied().unwrap_or(r * self.lambdas[k])
    }

    pub fn smallest_lambda(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("file not found: {}", path.display())))
    }
}

fn medium(spec: &MediumSpec, rho: f64) -> Result<MediumModel, CliError> {
    let mut m = match spec {
        MediumSpec::Constant { c } => MediumModel::constant(*c)?,
        MediumSpec::Gradient { c0, g, axis } => MediumModel::linear_gradient(*c0, *g, *axis)?,
        MediumSpec::Grid { file } => MediumModel::grid(io::read_medium(file)?),
    };
    m.rho = rho;
    Ok(m)
}
