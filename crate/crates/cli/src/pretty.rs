//! Indented text rendering of a report for people.

use std::fmt::Write;

use serde_json::Value;

pub fn render(v: &Value) -> String {
    let mut out = String::new();
    block(&mut out, v, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(if *b { "yes" } else { "no" }.into()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items)
            if items
                .iter()
                .all(|i| matches!(i, Value::String(_) | Value::Number(_) | Value::Bool(_))) =>
        {
            if items.is_empty() {
                return Some("-".into());
            }
            Some(
                items
                    .iter()
                    .map(|i| scalar(i).unwrap())
                    .collect::<Vec<_>>()
                    .join(", "),
            )
        }
        _ => None,
    }
}

/// Arrays of short scalar arrays print one row per line.
fn is_table(items: &[Value]) -> bool {
    !items.is_empty()
        && items
            .iter()
            .all(|i| matches!(i, Value::Array(_)) && scalar(i).is_some())
}

fn block(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (key, val) in map {
                match (scalar(val), val) {
                    (Some(s), _) => {
                        let _ = writeln!(out, "{pad}{key}: {s}");
                    }
                    (None, Value::Array(items)) if is_table(items) => {
                        let _ = writeln!(out, "{pad}{key}:");
                        for row in items {
                            let cells: Vec<String> = row
                                .as_array()
                                .unwrap()
                                .iter()
                                .map(|c| format!("{:>4}", scalar(c).unwrap()))
                                .collect();
                            let _ = writeln!(out, "{pad}  {}", cells.join(""));
                        }
                    }
                    (None, _) => {
                        let _ = writeln!(out, "{pad}{key}:");
                        block(out, val, depth + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match scalar(item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}[{}]", i + 1);
                        block(out, item, depth + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap());
        }
    }
}
