//! Plain-text `key=value` documents shared by the config and spec files.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KvError {
    #[error("line {line}: expected `key=value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
}

/// Parses `key=value` lines. Blank lines and lines starting with `#` are
/// skipped; keys and values are trimmed. Order is not preserved.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>, KvError> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| KvError::Malformed {
            line: idx + 1,
            text: line.to_string(),
        })?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(KvError::Malformed {
                line: idx + 1,
                text: line.to_string(),
            });
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(KvError::Duplicate { line: idx + 1, key });
        }
    }
    Ok(out)
}

pub fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

/// Comma-separated reals, e.g. `0.01,0.1`.
pub fn parse_reals(value: &str) -> Option<Vec<f64>> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().ok())
        .collect()
}
