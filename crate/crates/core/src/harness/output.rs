use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::screen::TrajectoryRecord;

/// C's `%.17g`: 17 significant digits, trailing zeros dropped, exponent
/// form below `1e-4` or from `1e17`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    strip_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(file))
}

/// CSV text of a trajectory: `k,s_hat,t_hat,screened`.
pub fn trajectory_csv(records: &[TrajectoryRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str("k,s_hat,t_hat,screened\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{}", r.k, fmt_g17(r.s_hat), fmt_g17(r.t_hat), r.screened as u8);
    }
    out
}

pub fn emit_trajectory_csv(records: &[TrajectoryRecord], path: &Path) -> Result<()> {
    write_text(&trajectory_csv(records), path)
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn report_text(document: &Value) -> String {
    let mut s = serde_json::to_string_pretty(document).expect("values serialize");
    s.push('\n');
    s
}

pub fn emit_report(document: &Value, path: &Path) -> Result<()> {
    write_text(&report_text(document), path)
}

/// A number for the report; non-finite values become the strings
/// `"inf"`, `"-inf"` and `"nan"`.
pub fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None if x.is_nan() => Value::String("nan".into()),
        None => Value::String(if x > 0.0 { "inf" } else { "-inf" }.into()),
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Builds an object from `(key, value)` pairs; keys come out sorted.
pub fn object<I: IntoIterator<Item = (&'static str, Value)>>(pairs: I) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}
