use std::fmt::Write as _;
use std::time::Duration;

use awi_core::experiments::{
    desk_penalty_check, lambda_sweep, local_descent, multi_arrival_demo, multi_arrival_onset, objective_scan,
    penalty_limit_check, relative_grid, remainder_effect, sigma_coupling_sweep, DescentOptions, ModelFamily,
    Scenario, SweepTable,
};
use awi_core::filter::{filter_diagnostics, solve_filter};
use awi_core::forward::RemainderSpec;
use awi_core::io::{self, filter_csv, report_csv, GatherMeta};
use awi_core::medium::MediumKind;
use awi_core::objectives::{j_awi, j_fwi, j_mswi, j_tilde, ObjectiveKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ScenarioConfig;
use crate::{selftest, CliError, Command};

/// File name (relative to the output directory) and contents.
pub type Outputs = Vec<(String, String)>;

/// A failed run still hands back whatever it produced.
pub struct Failure {
    pub outputs: Outputs,
    pub error: CliError,
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { outputs: Vec::new(), error: e.into() }
    }
}

pub fn run(cmd: Command, cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    match cmd {
        Command::Generate => generate(cfg),
        Command::Filter => filters(cfg),
        Command::Objective => objectives(cfg),
        Command::SweepLambda => sweep_lambda(cfg),
        Command::SweepSigma => sweep_sigma(cfg),
        Command::Remainder => remainder(cfg),
        Command::PenaltyLimit => penalty(cfg),
        Command::Scan => scan(cfg),
        Command::Descent => descent(cfg),
        Command::MultiArrival => multi(cfg),
        Command::Selftest => selftest::run(cfg),
    }
}

fn coupling(cfg: &ScenarioConfig, scn: &Scenario) -> Result<f64, CliError> {
    Ok(match cfg.r {
        Some(r) => r,
        None => scn.default_r()?,
    })
}

fn no_sigma_overrides(cfg: &ScenarioConfig, what: &str) -> Result<(), CliError> {
    if cfg.sigmas.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{what} couples σ = rλ; drop the 'sigmas' overrides")))
    }
}

fn generate(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let scn = cfg.scenario()?;
    let mut out = vec![("geometry.csv".to_string(), io::geometry_csv(&scn.geometry))];
    for (name, m) in [("medium.csv", &scn.medium), ("medium_star.csv", &scn.medium_star)] {
        if let MediumKind::Grid(g) = &m.kind {
            out.push((name.into(), io::medium_csv(g)));
        }
    }
    for (k, &lambda) in cfg.lambdas.iter().enumerate() {
        let (pred, obs) = scn.gathers(lambda)?;
        let meta = GatherMeta { axis: scn.axis(), wavelet: cfg.wavelet, lambda };
        for (stem, g) in [("predicted", &pred), ("observed", &obs)] {
            out.push((format!("{stem}_{k:02}.csv"), io::gather_csv(g)));
            out.push((format!("{stem}_{k:02}.meta"), io::meta_text(&meta)));
        }
    }
    Ok(out)
}

fn filters(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let scn = cfg.scenario()?;
    let r = coupling(cfg, &scn)?;
    let mut out = Outputs::new();
    for (k, &lambda) in cfg.lambdas.iter().enumerate() {
        let sigma = cfg.sigma(k, r);
        let (pred, obs) = scn.gathers(lambda)?;
        for (id, p, d) in pred.zip(&obs)? {
            let u = solve_filter(p, d, sigma)?;
            let diag = filter_diagnostics(&u, p, d)?;
            let mut text = format!("# lambda={lambda:.12e}, sigma={sigma:.12e}, pair_id={id}\n");
            text.push_str(&filter_csv(&u, &diag));
            out.push((format!("filter_{k:02}_pair{id}.csv"), text));
        }
    }
    Ok(out)
}

fn objectives(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let scn = cfg.scenario()?;
    let r = coupling(cfg, &scn)?;
    let mut out = Outputs::new();
    let mut table = SweepTable::new("lambda", &["sigma", "j_fwi", "j_awi", "j_mswi", "j_tilde"]);
    for (k, &lambda) in cfg.lambdas.iter().enumerate() {
        let sigma = cfg.sigma(k, r);
        let (pred, obs) = scn.gathers(lambda)?;
        let fwi = j_fwi(&pred, &obs)?;
        let awi = j_awi(&pred, &obs, sigma)?.with_scale(lambda, r);
        let mswi = j_mswi(&pred, &obs, sigma)?.with_scale(lambda, r);
        let tilde = j_tilde(&pred, &obs, sigma)?;
        table.push(lambda, vec![sigma, fwi.total, awi.total, mswi.total, tilde]);
        for rep in [&fwi, &awi, &mswi] {
            out.push((format!("report_{}_{k:02}.csv", rep.kind.name()), report_csv(rep)));
        }
    }
    table.note("r", r);
    out.push(("objectives.csv".into(), table.to_csv()));
    Ok(out)
}

fn sweep_lambda(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    no_sigma_overrides(cfg, "sweep-lambda")?;
    let scn = cfg.scenario()?;
    let t = lambda_sweep(&scn, &cfg.lambdas, coupling(cfg, &scn)?)?;
    Ok(vec![("lambda_sweep.csv".into(), t.to_csv())])
}

fn sweep_sigma(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let scn = cfg.scenario()?;
    let s = &cfg.sigma_sweep;
    let sigmas: Vec<f64> = s.ratios.iter().map(|q| q * s.lambda).collect();
    let mut t = sigma_coupling_sweep(&scn, s.lambda, &sigmas)?;
    t.note("r", coupling(cfg, &scn)?);
    Ok(vec![("sigma_sweep.csv".into(), t.to_csv())])
}

/// Falls back to the default remainder (observed side perturbed) when the
/// config has none, so the command always measures something.
fn remainder(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    no_sigma_overrides(cfg, "remainder")?;
    let mut scn = cfg.scenario()?;
    let defaulted = !scn.has_remainder();
    if defaulted {
        let spec = RemainderSpec::default();
        scn.opts.remainder = Some(spec);
        scn.opts_star.remainder = Some(RemainderSpec { b0: 0.7 * spec.b0, scale_b: 1.5 * spec.scale_b, ..spec });
    }
    let r = coupling(cfg, &scn)?;
    let mut effect = remainder_effect(&scn, &cfg.lambdas, r)?;
    effect.note("default_remainder", if defaulted { 1.0 } else { 0.0 });
    let sweep = lambda_sweep(&scn, &cfg.lambdas, r)?;
    Ok(vec![("remainder.csv".into(), effect.to_csv()), ("remainder_lambda_sweep.csv".into(), sweep.to_csv())])
}

fn penalty(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let p = &cfg.penalty;
    let desk = desk_penalty_check(p.desk_size, cfg.seed, &p.alphas)?;
    let mut out = vec![("penalty_desk.csv".to_string(), desk.to_csv())];
    let scn = match cfg.scenario() {
        Ok(s) => s,
        Err(CliError::Validation(_)) if cfg.medium.is_none() && cfg.geometry.is_none() => return Ok(out),
        Err(e) => return Err(Failure { outputs: out, error: e }),
    };
    let r = coupling(cfg, &scn).map_err(|error| Failure { outputs: out.clone(), error })?;
    match penalty_limit_check(&scn, p.lambda, r, &p.alpha_factors, &p.epsilons) {
        Ok(lim) => {
            out.push(("penalty_alpha.csv".into(), lim.alpha_table.to_csv()));
            out.push(("penalty_eps.csv".into(), lim.eps_table.to_csv()));
            Ok(out)
        }
        Err(e) => Err(Failure { outputs: out, error: e.into() }),
    }
}

fn scan_lambda(cfg: &ScenarioConfig) -> f64 {
    cfg.scan.lambda.unwrap_or_else(|| cfg.smallest_lambda())
}

fn scan(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let scn = cfg.scenario()?;
    let family: ModelFamily = cfg.scan.family.parse()?;
    let truth = family.truth(&scn.medium_star)?;
    let grid = relative_grid(truth, cfg.scan.half_width, cfg.scan.points);
    let res = objective_scan(&scn, family, &grid, scan_lambda(cfg), coupling(cfg, &scn)?)?;
    Ok(vec![("scan.csv".into(), res.to_csv())])
}

/// Configured start errors followed by `random_starts` seeded draws.
pub fn start_errors(cfg: &ScenarioConfig) -> Vec<f64> {
    let d = &cfg.descent;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = d.start_errors.clone();
    starts.extend((0..d.random_starts).map(|_| rng.gen_range(-d.spread..=d.spread)));
    starts
}

fn descent(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let scn = cfg.scenario()?;
    let family: ModelFamily = cfg.scan.family.parse()?;
    let truth = family.truth(&scn.medium_star)?;
    let d = &cfg.descent;
    let opts = DescentOptions {
        step: d.step,
        fd_step: d.fd_step,
        max_iter: d.max_iter,
        grad_tol: d.grad_tol,
        max_move: d.max_move,
        ..DescentOptions::new(scan_lambda(cfg), coupling(cfg, &scn)?)
    };
    let kinds = [ObjectiveKind::Awi, ObjectiveKind::Fwi];
    let mut out = Outputs::new();
    let mut summary = SweepTable::new("start_error", &["final_error_awi", "steps_awi", "final_error_fwi", "steps_fwi"]);
    for (i, &e) in start_errors(cfg).iter().enumerate() {
        let mut row = Vec::new();
        for kind in kinds {
            let t = local_descent(kind, &scn, family, truth * (1.0 + e), &opts)?;
            row.push((t.last() - truth) / truth);
            row.push(t.steps() as f64);
            out.push((format!("descent_{}_{i:02}.csv", kind.name()), t.to_csv()));
        }
        summary.push(e, row);
    }
    summary.note("truth", truth);
    summary.note("lambda", opts.lambda);
    out.push(("descent.csv".into(), summary.to_csv()));
    Ok(out)
}

fn multi(cfg: &ScenarioConfig) -> Result<Outputs, Failure> {
    let m = cfg.arrival_scenario()?;
    let r = match cfg.r {
        Some(r) => r,
        None => m.default_r()?,
    };
    let mut out = vec![("multi_arrival.csv".to_string(), multi_arrival_demo(&m, &cfg.lambdas, r)?.to_csv())];
    if !cfg.multi.separations.is_empty() {
        let t = multi_arrival_onset(&m, cfg.multi.onset_lambda, r, &cfg.multi.separations)?;
        out.push(("multi_arrival_onset.csv".into(), t.to_csv()));
    }
    Ok(out)
}

/// Plain-text TOML: `[run]` with versions, outputs and timings, then the
/// resolved config, which reloads as-is with `--config`.
pub fn manifest(cmd: Command, cfg: &ScenarioConfig, outputs: &[String], t: [Duration; 4]) -> String {
    let mut s = String::from("[run]\n");
    let _ = writeln!(s, "command = {:?}", cmd.name());
    let _ = writeln!(s, "awi_cli_version = {:?}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "awi_core_version = {:?}", awi_core::VERSION);
    let _ = writeln!(s, "threads = {}", rayon::current_num_threads());
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let list: Vec<String> = outputs.iter().map(|o| format!("{o:?}")).collect();
    let _ = writeln!(s, "outputs = [{}]", list.join(", "));
    s.push_str("\n[run.timings]\n");
    for (k, d) in ["load_seconds", "compute_seconds", "write_seconds", "total_seconds"].iter().zip(t) {
        let _ = writeln!(s, "{k} = {:.6}", d.as_secs_f64());
    }
    let mut config = toml::Table::new();
    config.insert("config".into(), toml::Value::try_from(cfg).expect("config serializes"));
    s.push('\n');
    s.push_str(&toml::to_string(&config).expect("config serializes"));
    s
}
