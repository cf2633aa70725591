//! CSV files for traces, media, geometries, gathers, filters and reports.
//! Numbers are written with 13 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{AwiError, Result};
use crate::filter::{FilterDiagnostics, MatchingFilter};
use crate::forward::Gather;
use crate::medium::{Geometry, SourceReceiverPair, VelocityGrid};
use crate::objectives::ObjectiveReport;
use crate::signal::{TimeAxis, Trace, WaveletKind};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AwiError + '_ {
    move |source| AwiError::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, msg: impl std::fmt::Display) -> AwiError {
    AwiError::Parse(format!("{}: {msg}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Rows of a CSV file with a header, skipping `#` comment lines.
fn read_rows(path: &Path, expect: &[&str]) -> Result<Vec<Vec<f64>>> {
    let text = read_text(path)?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| parse_err(path, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != expect {
        return Err(parse_err(path, format!("expected header {}, found {}", expect.join(","), names.join(","))));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, e))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(path, format!("row {}: '{f}': {e}", line + 1))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Sample interval of uniformly spaced times.
fn uniform_dt(path: &Path, times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(parse_err(path, "need at least two samples"));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (i, t) in times.iter().enumerate() {
        if (t - (times[0] + i as f64 * dt)).abs() > 1e-6 * dt {
            return Err(parse_err(path, format!("non-uniform sampling at row {}", i + 1)));
        }
    }
    Ok(dt)
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut s = String::from("t,value\n");
    for (t, v) in trace.times().zip(trace.samples()) {
        let _ = writeln!(s, "{t:.12e},{v:.12e}");
    }
    s
}

pub fn write_trace(path: &Path, trace: &Trace) -> Result<()> {
    write_text(path, &trace_csv(trace))
}

pub fn read_trace(path: &Path) -> Result<Trace> {
    let rows = read_rows(path, &["t", "value"])?;
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let dt = uniform_dt(path, &times)?;
    Trace::new(rows.iter().map(|r| r[1]).collect(), dt, times[0])
}

/// Header line of names, one line of values, then `nz` rows of `nx` velocities.
pub fn medium_csv(grid: &VelocityGrid) -> String {
    let mut s = String::from("nx,nz,dx,origin_x,origin_z\n");
    let _ = writeln!(s, "{},{},{:.12e},{:.12e},{:.12e}", grid.nx, grid.nz, grid.spacing, grid.origin[0], grid.origin[1]);
    for row in grid.velocities().chunks(grid.nx) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn write_medium(path: &Path, grid: &VelocityGrid) -> Result<()> {
    write_text(path, &medium_csv(grid))
}

pub fn read_medium(path: &Path) -> Result<VelocityGrid> {
    let text = read_text(path)?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let first = lines.next().ok_or_else(|| parse_err(path, "empty medium file"))?;
    let numbers = |line: &str| -> Result<Vec<f64>> {
        line.split(',').map(|f| f.trim().parse::<f64>().map_err(|e| parse_err(path, format!("'{f}': {e}")))).collect()
    };
    let head = if first.replace(' ', "") == "nx,nz,dx,origin_x,origin_z" {
        numbers(lines.next().ok_or_else(|| parse_err(path, "missing grid header values"))?)?
    } else {
        numbers(first)?
    };
    if head.len() != 5 || head[0].fract() != 0.0 || head[1].fract() != 0.0 || head[0] < 0.0 || head[1] < 0.0 {
        return Err(parse_err(path, "grid header must be nx,nz,dx,origin_x,origin_z with integer nx, nz"));
    }
    let (nx, nz) = (head[0] as usize, head[1] as usize);
    let mut velocity = Vec::with_capacity(nx * nz);
    for line in lines {
        velocity.extend(numbers(line)?);
    }
    VelocityGrid::new(nx, nz, head[2], [head[3], head[4]], velocity)
}

pub fn geometry_csv(geometry: &Geometry) -> String {
    let mut s = String::from("src_x,src_z,rcv_x,rcv_z\n");
    for p in geometry.pairs() {
        let _ = writeln!(s, "{:.12e},{:.12e},{:.12e},{:.12e}", p.source[0], p.source[1], p.receiver[0], p.receiver[1]);
    }
    s
}

pub fn write_geometry(path: &Path, geometry: &Geometry) -> Result<()> {
    write_text(path, &geometry_csv(geometry))
}

/// Pairs get ids in file order.
pub fn read_geometry(path: &Path) -> Result<Geometry> {
    let rows = read_rows(path, &["src_x", "src_z", "rcv_x", "rcv_z"])?;
    if rows.is_empty() {
        return Err(parse_err(path, "geometry has no pairs"));
    }
    Geometry::from_pairs(
        rows.iter()
            .enumerate()
            .map(|(id, r)| SourceReceiverPair { id, source: [r[0], r[1]], receiver: [r[2], r[3]] })
            .collect(),
    )
}

/// Sidecar describing how a gather was synthesized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatherMeta {
    pub axis: TimeAxis,
    pub wavelet: WaveletKind,
    pub lambda: f64,
}

pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

pub fn gather_csv(gather: &Gather) -> String {
    let mut s = String::from("pair_id,t,value\n");
    for (id, trace) in gather.iter() {
        for (t, v) in trace.times().zip(trace.samples()) {
            let _ = writeln!(s, "{id},{t:.12e},{v:.12e}");
        }
    }
    s
}

pub fn meta_text(meta: &GatherMeta) -> String {
    let a = meta.axis;
    format!(
        "dt={:.12e}\nt0={:.12e}\nn={}\nwavelet={}\nlambda={:.12e}\n",
        a.dt,
        a.t0,
        a.n,
        meta.wavelet.name(),
        meta.lambda
    )
}

/// Writes the gather and its `.meta` sidecar.
pub fn write_gather(path: &Path, gather: &Gather, meta: &GatherMeta) -> Result<()> {
    write_text(path, &gather_csv(gather))?;
    write_text(&meta_path(path), &meta_text(meta))
}

pub fn read_gather(path: &Path) -> Result<(Gather, GatherMeta)> {
    let mpath = meta_path(path);
    let kv: BTreeMap<String, String> = read_text(&mpath)?
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let get = |k: &str| kv.get(k).ok_or_else(|| parse_err(&mpath, format!("missing '{k}'")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse::<f64>().map_err(|e| parse_err(&mpath, format!("{k}: {e}"))) };
    let n = get("n")?.parse::<usize>().map_err(|e| parse_err(&mpath, format!("n: {e}")))?;
    let axis = TimeAxis::new(n, num("dt")?, num("t0")?)?;
    let meta = GatherMeta { axis, wavelet: get("wavelet")?.parse()?, lambda: num("lambda")? };

    let rows = read_rows(path, &["pair_id", "t", "value"])?;
    let mut traces: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        if r[0] < 0.0 || r[0].fract() != 0.0 {
            return Err(parse_err(path, format!("bad pair id {}", r[0])));
        }
        traces.entry(r[0] as usize).or_default().push(r[2]);
    }
    let traces = traces
        .into_iter()
        .map(|(id, v)| {
            if v.len() != n {
                return Err(parse_err(path, format!("pair {id} has {} samples, meta says {n}", v.len())));
            }
            Ok((id, Trace::new(v, axis.dt, axis.t0)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((Gather::new(axis, traces)?, meta))
}

pub fn filter_csv(filter: &MatchingFilter, diag: &FilterDiagnostics) -> String {
    let mut s = String::from("lag,value\n");
    for (t, v) in filter.trace.times().zip(filter.trace.samples()) {
        let _ = writeln!(s, "{t:.12e},{v:.12e}");
    }
    let _ = writeln!(
        s,
        "# norm_u={:.12e}, norm_Tu={:.12e}, ratio={:.12e}, residual_ratio={:.12e}",
        diag.norm_u, diag.norm_tu, diag.ratio, diag.residual_ratio
    );
    s
}

pub fn write_filter(path: &Path, filter: &MatchingFilter, diag: &FilterDiagnostics) -> Result<()> {
    write_text(path, &filter_csv(filter, diag))
}

pub fn report_csv(report: &ObjectiveReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
    let mut s = format!("# objective={}: {}\n", report.kind.name(), report.kind.convention());
    if let (Some(l), Some(r)) = (report.lambda, report.r) {
        let _ = writeln!(s, "# lambda={l:.12e}, r={r:.12e}");
    }
    if let Some(sigma) = report.sigma {
        let _ = writeln!(s, "# sigma={sigma:.12e}");
    }
    s.push_str("pair_id,value,ratio,residual_ratio\n");
    for (id, t) in &report.per_trace {
        let _ = writeln!(s, "{id},{:.12e},{},{}", t.value, opt(t.ratio), opt(t.residual_ratio));
    }
    let _ = writeln!(s, "# total={:.12e}", report.total);
    s
}

pub fn write_report(path: &Path, report: &ObjectiveReport) -> Result<()> {
    write_text(path, &report_csv(report))
}
