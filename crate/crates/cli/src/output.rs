//! Rendering of command results as JSON or aligned text.

use serde_json::{Map, Number, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// Keys whose string values are labels, never numbers.
const LABEL_KEYS: &[&str] = &["name", "gate", "message", "invariant", "kind", "text", "status", "wires"];

fn is_rational_literal(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    let mut parts = body.splitn(2, '/');
    let digits = |p: Option<&str>| p.is_some_and(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
    let numer = parts.next();
    match parts.next() {
        None => digits(numer),
        Some(d) => digits(numer) && digits(Some(d)),
    }
}

fn literal_to_f64(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((p, q)) => Some(p.parse::<f64>().ok()? / q.parse::<f64>().ok()?),
        None => s.parse().ok(),
    }
}

/// Replaces exact `"p/q"` strings by the nearest floats.
pub fn floatify(v: Value) -> Value {
    match v {
        Value::String(s) if is_rational_literal(&s) => literal_to_f64(&s)
            .and_then(Number::from_f64)
            .map_or(Value::String(s), Value::Number),
        Value::Array(items) => Value::Array(items.into_iter().map(floatify).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| {
                    let v = if LABEL_KEYS.contains(&k.as_str()) { v } else { floatify(v) };
                    (k, v)
                })
                .collect(),
        ),
        other => other,
    }
}

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            text(v, 0, &mut out);
            out
        }
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn as_matrix(v: &Value) -> Option<(usize, usize, &Vec<Value>)> {
    let m = v.as_object()?;
    if m.len() != 3 {
        return None;
    }
    let rows = usize::try_from(m.get("rows")?.as_u64()?).ok()?;
    let cols = usize::try_from(m.get("cols")?.as_u64()?).ok()?;
    let data = m.get("data")?.as_array()?;
    (data.len() == rows * cols).then_some((rows, cols, data))
}

fn grid(rows: usize, cols: usize, data: &[Value], indent: usize, out: &mut String) {
    let cells: Vec<String> = data.iter().map(scalar).collect();
    let width = cells.iter().map(String::len).max().unwrap_or(1);
    for r in 0..rows {
        out.push_str(&" ".repeat(indent));
        let row: Vec<String> = (0..cols).map(|c| format!("{:>width$}", cells[r * cols + c])).collect();
        out.push_str(&row.join("  "));
        out.push('\n');
    }
}

fn entry(key: &str, v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    if is_scalar(v) {
        out.push_str(&format!("{pad}{key}: {}\n", scalar(v)));
    } else if let Some(items) = v.as_array().filter(|a| a.iter().all(is_scalar)) {
        let items: Vec<String> = items.iter().map(scalar).collect();
        out.push_str(&format!("{pad}{key}: [{}]\n", items.join(", ")));
    } else if let Some((rows, cols, data)) = as_matrix(v) {
        out.push_str(&format!("{pad}{key}: {rows}x{cols}\n"));
        grid(rows, cols, data, indent + 2, out);
    } else {
        out.push_str(&format!("{pad}{key}:\n"));
        text(v, indent + 2, out);
    }
}

fn text(v: &Value, indent: usize, out: &mut String) {
    match v {
        Value::Object(map) => object(map, indent, out),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                entry(&format!("[{i}]"), item, indent, out);
            }
        }
        other => {
            out.push_str(&" ".repeat(indent));
            out.push_str(&scalar(other));
            out.push('\n');
        }
    }
}

fn object(map: &Map<String, Value>, indent: usize, out: &mut String) {
    for (k, v) in map {
        entry(k, v, indent, out);
    }
}
