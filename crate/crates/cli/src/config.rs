//! JSON config files expanded into command-line flags.
//!
//! A config is a JSON object whose keys are long flag names. The optional
//! key `command` holds the subcommand path (`"urn pmf"` or
//! `["urn", "pmf"]`) and is used only when none is given on the command
//! line. Flags given on the command line win over the file.

use std::collections::BTreeSet;
use std::fs;

use serde_json::Value;

/// Replaces `--config FILE` in `args` (program name first) by the flags the
/// file provides.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a file")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| format!("config {path}: {e}"))?;
    merge(rest, &value)
}

fn merge(mut args: Vec<String>, config: &Value) -> Result<Vec<String>, String> {
    let obj = config.as_object().ok_or("config must be a JSON object")?;
    let present: BTreeSet<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let has_command = args.get(1).is_some_and(|a| !a.starts_with('-'));
    for (key, v) in obj {
        if key == "command" {
            if has_command {
                continue;
            }
            let words: Vec<String> = match v {
                Value::String(s) => s.split_whitespace().map(String::from).collect(),
                Value::Array(a) => a
                    .iter()
                    .map(|w| w.as_str().map(String::from).ok_or("command words must be strings"))
                    .collect::<Result<_, _>>()?,
                _ => return Err("`command` must be a string or array".into()),
            };
            let at = args.len().min(1);
            args.splice(at..at, words);
            continue;
        }
        if present.contains(key) {
            continue;
        }
        match v {
            Value::Bool(true) => args.push(format!("--{key}")),
            Value::Bool(false) | Value::Null => {}
            Value::Number(_) | Value::String(_) => {
                args.push(format!("--{key}"));
                args.push(scalar(v)?);
            }
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_, _>>()?;
                args.push(format!("--{key}"));
                args.push(parts.join(","));
            }
            Value::Object(_) => return Err(format!("config key `{key}` cannot be an object")),
        }
    }
    Ok(args)
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        _ => Err(format!("expected a number or string, got {v}")),
    }
}
