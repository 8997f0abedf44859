//! JSON config files. Each key names a long flag (`n_boots` or `n-boots`);
//! the values are spliced into the argument list ahead of the user's own
//! flags, so flags given on the command line win. A run manifest works as a
//! config too: its `options` object is used.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// Keys that describe the run rather than set a flag.
const SKIP: &[&str] = &["config", "command"];

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Flag tokens for one config object.
pub fn tokens(obj: &serde_json::Map<String, Value>) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (key, v) in obj {
        if SKIP.contains(&key.as_str()) {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag.into()),
            Value::Array(items) => {
                if items.is_empty() {
                    continue;
                }
                let parts = items
                    .iter()
                    .map(|x| scalar(x).with_context(|| format!("config key {key:?}: list items must be scalars")))
                    .collect::<Result<Vec<_>>>()?;
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            Value::Object(_) => bail!("config key {key:?}: nested objects are not supported"),
            other => {
                out.push(flag.into());
                out.push(scalar(other).expect("scalar").into());
            }
        }
    }
    Ok(out)
}

fn load(path: &Path) -> Result<serde_json::Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let obj = match v {
        Value::Object(mut o) => match o.remove("options") {
            Some(Value::Object(opts)) => opts,
            Some(_) => bail!("config {}: \"options\" must be an object", path.display()),
            None => o,
        },
        _ => bail!("config {} must be a JSON object", path.display()),
    };
    Ok(obj)
}

/// `args` with config-file flags inserted right after the subcommand name.
pub fn merge(args: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let extra = tokens(&load(Path::new(&path))?)?;
    let at = args
        .iter()
        .position(|a| subcommands.iter().any(|s| a.to_str() == Some(*s)))
        .map_or(1, |i| i + 1);
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn tokens_from_object() {
        let v: Value = serde_json::json!({
            "n_boots": 50, "penalize_diagonal": true, "verbose": false,
            "sample_sizes": [100, 500], "seed": null, "method": "pcor", "config": "x"
        });
        let t = tokens(v.as_object().unwrap()).unwrap();
        assert_eq!(
            t,
            os(&["--method", "pcor", "--n-boots", "50", "--penalize-diagonal", "--sample-sizes", "100,500"])
        );
    }

    #[test]
    fn merge_inserts_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"options": {"n_boots": 20}}"#).unwrap();
        let args = os(&["psynet", "--seed", "3", "bootstrap", "--config", p.to_str().unwrap(), "--n-boots", "30"]);
        let m = merge(args, &["bootstrap"]).unwrap();
        assert_eq!(&m[4..6], &os(&["--n-boots", "20"])[..]);
        assert_eq!(m.last().unwrap(), "30");
    }
}
