//! Config files and their merge with the command line.
//!
//! A config file holds either `key = value` lines or one flat JSON object.
//! Its entries become long flags placed before the command-line flags, and
//! since every option overrides itself, the command line wins.

use std::path::Path;

use crate::error::CliError;

/// Splits `--config <path>` / `--config=<path>` out of `argv`.
pub fn take_config_path(argv: &mut Vec<String>) -> Result<Option<String>, CliError> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(None);
    };
    let flag = argv.remove(pos);
    if let Some(path) = flag.strip_prefix("--config=") {
        return Ok(Some(path.to_string()));
    }
    if pos < argv.len() {
        Ok(Some(argv.remove(pos)))
    } else {
        Err(CliError::Usage("--config needs a file path".to_string()))
    }
}

fn scalar_to_string(key: &str, v: &serde_json::Value) -> Result<String, CliError> {
    use serde_json::Value;
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        Value::Array(items) => {
            let parts: Result<Vec<String>, CliError> =
                items.iter().map(|i| scalar_to_string(key, i)).collect();
            Ok(parts?.join(","))
        }
        _ => Err(CliError::Usage(format!("config key `{key}` must be a scalar or a list"))),
    }
}

/// Parses a config file into ordered `(key, value)` entries.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(trimmed)
            .map_err(|e| CliError::Usage(format!("config JSON: {e}")))?;
        return map.iter().map(|(k, v)| Ok((k.clone(), scalar_to_string(k, v)?))).collect();
    }
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected `key = value`", lineno + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn normalize_key(k: &str) -> String {
    k.trim_start_matches('-').replace('_', "-")
}

/// Builds the argument vector clap sees: program name, command, file
/// entries, then the remaining command-line arguments.
pub fn merge(argv: Vec<String>, file: Vec<(String, String)>) -> Result<Vec<String>, CliError> {
    let mut argv = argv.into_iter();
    let program = argv.next().unwrap_or_else(|| "lorlab".to_string());
    let mut rest: Vec<String> = argv.collect();
    let mut entries = Vec::new();
    let mut command = None;
    for (k, v) in file {
        let key = normalize_key(&k);
        if key == "command" {
            command = Some(v);
            continue;
        }
        match v.as_str() {
            "true" => entries.push(format!("--{key}")),
            "false" => {}
            _ => entries.push(format!("--{key}={v}")),
        }
    }
    let mut out = vec![program];
    let first_is_command = rest.first().is_some_and(|a| !a.starts_with('-'));
    if first_is_command {
        out.push(rest.remove(0));
    } else if let Some(c) = command {
        out.push(c);
    }
    out.extend(entries);
    out.extend(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn key_value_and_json() {
        let kv = parse_config_text("# comment\np = 3\nnx=8\n").unwrap();
        assert_eq!(kv, vec![("p".into(), "3".into()), ("nx".into(), "8".into())]);
        let js = parse_config_text(r#"{"p_list": [1, 1.5, 2], "seed": 4}"#).unwrap();
        assert_eq!(js, vec![("p_list".into(), "1,1.5,2".into()), ("seed".into(), "4".into())]);
        assert!(parse_config_text("oops").is_err());
    }

    #[test]
    fn command_line_comes_last() {
        let merged = merge(
            s(&["lorlab", "tau", "--p", "2"]),
            vec![("p".into(), "3".into()), ("from".into(), "0,0".into())],
        )
        .unwrap();
        assert_eq!(merged, s(&["lorlab", "tau", "--p=3", "--from=0,0", "--p", "2"]));
        let from_file = merge(s(&["lorlab"]), vec![("command".into(), "net".into())]).unwrap();
        assert_eq!(from_file, s(&["lorlab", "net"]));
    }

    #[test]
    fn config_flag_extraction() {
        let mut a = s(&["lorlab", "--config", "c.txt", "tau"]);
        assert_eq!(take_config_path(&mut a).unwrap().as_deref(), Some("c.txt"));
        assert_eq!(a, s(&["lorlab", "tau"]));
        let mut b = s(&["lorlab", "tau", "--config=x.json"]);
        assert_eq!(take_config_path(&mut b).unwrap().as_deref(), Some("x.json"));
        let mut c = s(&["lorlab", "tau", "--config"]);
        assert!(take_config_path(&mut c).is_err());
    }
}
