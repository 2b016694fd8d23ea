//! Indented plain-text view of a report.

use serde_json::Value;

pub fn render(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for k in keys {
                walk(&mut out, &map[k], 0, Some(k));
            }
        }
        other => walk(&mut out, other, 0, None),
    }
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(match n.as_f64() {
            Some(f) if !(n.is_i64() || n.is_u64()) => format!("{f:.16e}"),
            _ => n.to_string(),
        }),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("(none)".into()),
        Value::Array(a)
            if a.iter()
                .all(|x| matches!(x, Value::String(_) | Value::Number(_))) =>
        {
            Some(
                a.iter()
                    .map(|x| scalar(x).unwrap_or_default())
                    .collect::<Vec<_>>()
                    .join(", "),
            )
        }
        _ => None,
    }
}

fn walk(out: &mut String, v: &Value, depth: usize, key: Option<&str>) {
    let pad = "  ".repeat(depth);
    let label = key.map(|k| format!("{k}:")).unwrap_or_else(|| "-".into());
    if let Some(s) = scalar(v) {
        out.push_str(&format!("{pad}{label} {s}\n"));
        return;
    }
    out.push_str(&format!("{pad}{label}\n"));
    match v {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for k in keys {
                walk(out, &map[k], depth + 1, Some(k));
            }
        }
        Value::Array(items) => {
            for item in items {
                walk(out, item, depth + 1, None);
            }
        }
        _ => {}
    }
}
