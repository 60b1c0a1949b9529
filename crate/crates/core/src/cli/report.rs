use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub exit_code: i32,
    /// Structured result, fields in insertion order.
    pub result: Value,
    pub lines: Vec<String>,
    pub tolerances: Value,
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest text of `x` at 12 significant digits; `-0` prints as `0`.
pub fn num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".into()
    } else if r.abs() < 1e-4 || r.abs() >= 1e12 {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

fn rounded(v: &Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.iter().map(|(k, v)| (k.clone(), rounded(v))).collect()),
        other => other.clone(),
    }
}

pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Text => r.lines.join("\n"),
        Format::Json => {
            let mut out = Map::new();
            out.insert("command".into(), Value::from(r.command));
            out.insert("exit_code".into(), Value::from(r.exit_code));
            out.insert("result".into(), rounded(&r.result));
            out.insert("tolerances".into(), r.tolerances.clone());
            serde_json::to_string_pretty(&Value::Object(out)).expect("report serializes")
        }
    }
}
