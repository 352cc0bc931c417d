//! Deterministic text output: `%.17g` floats, CSV tables and JSON documents.

use serde_json::{Number, Value};

use crate::matcore::CMatrix;

/// Formats like C's `printf("%.17g", x)`.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const P: i32 = 17;
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON number carrying the `%.17g` text verbatim; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(g17(x));
    }
    match g17(x).parse::<Number>() {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(g17(x)),
    }
}

/// Matrix as nested `[[re, im], ...]` rows.
pub fn matrix_json(m: &CMatrix) -> Value {
    let r = m.dim();
    Value::Array(
        (0..r)
            .map(|i| Value::Array((0..r).map(|j| Value::Array(vec![num(m[(i, j)].re), num(m[(i, j)].im)])).collect()))
            .collect(),
    )
}

/// Pretty JSON with a trailing newline.
pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// A CSV table with a fixed header; cells are pre-formatted strings.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects keyed by the header; numeric-looking cells become numbers.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(k, v)| {
                            let val =
                                v.parse::<Number>().map(Value::Number).unwrap_or_else(|_| Value::String(v.clone()));
                            (k.clone(), val)
                        })
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}
