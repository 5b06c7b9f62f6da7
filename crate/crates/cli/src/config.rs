//! `--config FILE` support: a JSON object whose keys are flag names.
//!
//! The object is expanded into flags inserted directly after the subcommand
//! name, so flags given explicitly on the command line (which come later)
//! take precedence.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

use crate::CliError;

pub const SUBCOMMANDS: [&str; 5] = ["separation", "online", "privacy", "stability", "hadamard-gap"];

fn config_path(args: &[OsString]) -> Option<(usize, usize, OsString)> {
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return args.get(i + 1).map(|p| (i, 2, p.clone()));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some((i, 1, OsString::from(p)));
        }
    }
    None
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Flags equivalent to a config object.
pub fn flags_from_config(obj: &serde_json::Map<String, Value>) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (key, v) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag.into()),
            Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
                let parts = parts.ok_or_else(|| CliError::Usage(format!("config key `{key}` must hold scalars")))?;
                out.push(format!("{flag}={}", parts.join(",")).into());
            }
            Value::Object(_) => return Err(CliError::Usage(format!("config key `{key}` cannot be an object"))),
            other => out.push(format!("{flag}={}", scalar(other).expect("scalar")).into()),
        }
    }
    Ok(out)
}

/// Rewrites the argument vector, replacing `--config FILE` by the flags it
/// holds.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some((pos, width, path)) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let value: Value = serde_json::from_str(&text)?;
    let Value::Object(obj) = value else {
        return Err(CliError::Usage("config file must hold a JSON object".into()));
    };
    let mut rest: Vec<OsString> = args[..pos].iter().chain(&args[pos + width..]).cloned().collect();
    let flags = flags_from_config(&obj)?;
    let sub = rest.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let insert_at = match sub {
        Some(i) => i + 1,
        None => {
            let cmd = obj
                .get("command")
                .and_then(Value::as_str)
                .ok_or_else(|| CliError::Usage("no subcommand given and config has no \"command\" key".into()))?;
            rest.insert(1.min(rest.len()), cmd.into());
            2.min(rest.len())
        }
    };
    rest.splice(insert_at..insert_at, flags);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flags_are_sorted_by_key_and_typed() {
        let obj: serde_json::Map<String, Value> = serde_json::from_str(
            r#"{"horizon": 10, "tuned": true, "skip": false, "lstar": [1, 2.5], "noise": "laplace"}"#,
        )
        .unwrap();
        let f = flags_from_config(&obj).unwrap();
        assert_eq!(f, os(&["--horizon=10", "--lstar=1,2.5", "--noise=laplace", "--tuned"]));
    }

    #[test]
    fn expansion_inserts_after_subcommand() {
        let dir = std::env::temp_dir().join(format!("gaussftpl-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("c.json");
        std::fs::write(&p, r#"{"command": "online", "seeds": 3}"#).unwrap();
        let out = expand(os(&["bin", "--config", p.to_str().unwrap(), "--seeds", "4"])).unwrap();
        assert_eq!(out, os(&["bin", "online", "--seeds=3", "--seeds", "4"]));
        let out = expand(os(&["bin", "online", "--config", p.to_str().unwrap()])).unwrap();
        assert_eq!(out, os(&["bin", "online", "--seeds=3"]));
        assert!(expand(os(&["bin", "--config", dir.join("missing").to_str().unwrap()])).is_err());
    }
}
