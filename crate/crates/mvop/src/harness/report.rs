//! Comparison and property-check reports.

use serde_json::{json, Value};

use super::format::{g17, num, Table};

/// One row of an error table: the largest error over the grid at degree `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub n: usize,
    pub max_error: f64,
    /// Grid point of the maximum, `[re, im]`.
    pub argmax: [f64; 2],
}

/// Least-squares slope of `-log E` against `log n`; `None` with fewer than three samples
/// or a non-positive error.
pub fn fit_exponent(rows: &[ErrorRow]) -> Option<f64> {
    if rows.len() < 3 || rows.iter().any(|r| !(r.max_error > 0.0) || !r.max_error.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_error.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// True when the errors decrease strictly from the second sample on.
pub fn monotone_tail(rows: &[ErrorRow]) -> bool {
    rows.windows(2).skip(usize::from(rows.len() > 2)).all(|w| w[1].max_error < w[0].max_error)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub regime: String,
    pub family: String,
    pub rows: Vec<ErrorRow>,
    pub exponent: Option<f64>,
    pub band: Option<[f64; 2]>,
    pub monotone: bool,
    pub pass: bool,
    pub detail: String,
}

impl ComparisonReport {
    /// Pass iff the tail is monotone and, when a band is given, the exponent lies in it.
    pub fn assess(regime: &str, family: &str, rows: Vec<ErrorRow>, band: Option<[f64; 2]>) -> Self {
        let exponent = fit_exponent(&rows);
        let monotone = monotone_tail(&rows);
        let in_band = match band {
            Some([lo, hi]) => exponent.is_some_and(|e| e >= lo && e <= hi),
            None => true,
        };
        let pass = monotone && in_band;
        let detail = match (band, exponent) {
            (Some([lo, hi]), Some(e)) => {
                format!("exponent {} in [{}, {}]: {in_band}; monotone: {monotone}", g17(e), lo, hi)
            }
            (Some(_), None) => "exponent needs at least three positive errors".into(),
            (None, _) => format!("monotone: {monotone}"),
        };
        ComparisonReport { regime: regime.into(), family: family.into(), rows, exponent, band, monotone, pass, detail }
    }

    /// `E(n_a) / E(n_b)` for two degrees present in the table.
    pub fn ratio(&self, na: usize, nb: usize) -> Option<f64> {
        let e = |n| self.rows.iter().find(|r| r.n == n).map(|r| r.max_error);
        Some(e(na)? / e(nb)?)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["n", "max_error", "argmax_re", "argmax_im"].map(String::from).to_vec());
        for r in &self.rows {
            t.push(vec![r.n.to_string(), g17(r.max_error), g17(r.argmax[0]), g17(r.argmax[1])]);
        }
        t
    }

    pub fn to_json(&self) -> Value {
        json!({
            "regime": self.regime,
            "family": self.family,
            "rows": self.rows.iter().map(|r| json!({
                "n": r.n,
                "max_error": num(r.max_error),
                "argmax": [num(r.argmax[0]), num(r.argmax[1])],
            })).collect::<Vec<_>>(),
            "exponent": self.exponent.map(num),
            "band": self.band.map(|[a, b]| vec![num(a), num(b)]),
            "monotone": self.monotone,
            "pass": self.pass,
            "detail": self.detail,
        })
    }
}

/// One verified invariant: `value <= tolerance` unless `pass` was decided otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub module: String,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckRecord {
    pub fn bound(module: &str, name: &str, value: f64, tolerance: f64) -> Self {
        let pass = value <= tolerance;
        CheckRecord { module: module.into(), name: name.into(), value, tolerance, pass, detail: String::new() }
    }

    pub fn flag(module: &str, name: &str, pass: bool, detail: impl Into<String>) -> Self {
        CheckRecord {
            module: module.into(),
            name: name.into(),
            value: if pass { 0.0 } else { 1.0 },
            tolerance: 0.0,
            pass,
            detail: detail.into(),
        }
    }

    /// A check that could not run because a numerical stage failed.
    pub fn failed(module: &str, name: &str, err: impl std::fmt::Display) -> Self {
        Self::flag(module, name, false, format!("error: {err}"))
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "module": self.module,
            "name": self.name,
            "value": num(self.value),
            "tolerance": num(self.tolerance),
            "pass": self.pass,
            "detail": self.detail,
        })
    }
}

pub fn checks_table(records: &[CheckRecord]) -> Table {
    let mut t = Table::new(["module", "name", "value", "tolerance", "pass", "detail"].map(String::from).to_vec());
    for r in records {
        t.push(vec![
            r.module.clone(),
            r.name.clone(),
            g17(r.value),
            g17(r.tolerance),
            r.pass.to_string(),
            csv_escape(&r.detail),
        ]);
    }
    t
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
