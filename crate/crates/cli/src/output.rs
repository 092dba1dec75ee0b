use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Number, Value};

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let r = sig12(x);
    if r != 0.0 && !(1e-4..1e15).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Applies [`sig12`] to every non-integer number in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            Number::from_f64(sig12(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect())
        }
        other => other,
    }
}

pub fn json_text(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&round_json(v)).expect("json value serializes");
    s.push('\n');
    s
}

pub fn csv_matrix(rows: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
        writeln!(s, "{}", cells.join(",")).expect("write to string");
    }
    s
}

pub fn emit(text: &str, out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt_num(std::f64::consts::SQRT_2), "1.41421356237");
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(1e-20 / 3.0), "3.33333333333e-21");
        assert_eq!(fmt_num(-2.0), "-2");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(9e-9), "9e-9");
    }

    #[test]
    fn rounds_nested_json() {
        let v = serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 1.0f64 / 7.0}});
        let r = round_json(v);
        assert_eq!(r["a"][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(r["a"][1].as_u64().unwrap(), 2);
        assert_eq!(r["b"]["c"].as_f64().unwrap(), 0.142857142857);
    }
}
