use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, AwiError, Result};

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn slope_fit(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.len() != ys.len() {
        return invalid(format!("slope fit needs equal lengths, got {} and {}", xs.len(), ys.len()));
    }
    if xs.len() < 4 {
        return invalid(format!("slope fit needs at least 4 points, got {}", xs.len()));
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return invalid(format!("slope fit needs positive finite values, got {v}"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("slope fit needs at least two distinct x values");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Fit { slope, intercept, r2 })
}

/// Measured quantities against one sweep variable, with optional log-log fits
/// and scalar notes (crossings, floors) carried alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub variable: String,
    pub columns: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
    pub fits: BTreeMap<String, Fit>,
    pub notes: BTreeMap<String, f64>,
}

impl SweepTable {
    pub fn new(variable: &str, columns: &[&str]) -> Self {
        SweepTable {
            variable: variable.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fits: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, x: f64, values: Vec<f64>) {
        assert_eq!(values.len(), self.columns.len(), "row width must match the columns");
        self.rows.push((x, values));
    }

    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.0).collect()
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| AwiError::InvalidArgument(format!("no column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r.1[k]).collect())
    }

    /// Value of `name` in the row whose variable equals `x`.
    pub fn value(&self, x: f64, name: &str) -> Result<f64> {
        let i = self
            .rows
            .iter()
            .position(|r| r.0 == x)
            .ok_or_else(|| AwiError::InvalidArgument(format!("no row at {} = {x}", self.variable)))?;
        Ok(self.column(name)?[i])
    }

    /// Fits `ln(name)` against `ln(variable)` and stores the result.
    pub fn fit(&mut self, name: &str) -> Result<Fit> {
        let f = slope_fit(&self.xs(), &self.column(name)?)?;
        self.fits.insert(name.to_string(), f);
        Ok(f)
    }

    pub fn note(&mut self, key: &str, value: f64) {
        self.notes.insert(key.to_string(), value);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{},{}", self.variable, self.columns.join(","));
        for (x, vals) in &self.rows {
            let _ = write!(s, "{x:.12e}");
            for v in vals {
                let _ = write!(s, ",{v:.12e}");
            }
            s.push('\n');
        }
        for (name, f) in &self.fits {
            let _ = writeln!(s, "# slope({name})={:.12e}, intercept={:.12e}, r2={:.12e}", f.slope, f.intercept, f.r2);
        }
        for (k, v) in &self.notes {
            let _ = writeln!(s, "# {k}={v:.12e}");
        }
        s
    }
}

/// Indices of strict local minima. Runs of equal values (relative tolerance
/// `1e-12`) form one basin, reported at the run's middle; a basin counts only
/// when both outer neighbours exist and are strictly larger.
pub fn strict_local_minima(values: &[f64]) -> Vec<usize> {
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    let mut out = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let mut j = i;
        while j + 1 < values.len() && eq(values[j + 1], values[i]) {
            j += 1;
        }
        if i > 0 && j + 1 < values.len() && values[i - 1] > values[i] && values[j + 1] > values[j] {
            out.push((i + j) / 2);
        }
        i = j + 1;
    }
    out
}
