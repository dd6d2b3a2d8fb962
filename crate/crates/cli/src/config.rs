//! Flat `key = value` config files. Keys are the long flag names of the
//! subcommand (with `-` or `_`); values are written as on the command line,
//! whitespace separating multiple values. Flags given on the command line win.

use clap::{ArgAction, Command};
use std::ffi::OsString;
use std::fs;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn config_path(args: &[String]) -> Option<Result<String, ConfigError>> {
    let mut it = args.iter().skip(2);
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return Some(
                it.next()
                    .cloned()
                    .ok_or_else(|| ConfigError("--config needs a path".into())),
            );
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(Ok(p.to_string()));
        }
    }
    None
}

fn given(args: &[String], long: &str) -> bool {
    let flag = format!("--{long}");
    let eq = format!("{flag}=");
    args.iter()
        .skip(2)
        .any(|a| *a == flag || a.starts_with(&eq))
}

/// Expands `--config FILE` into the flags it stands for, skipping any flag
/// that already appears on the command line.
pub fn expand(cmd: &Command, args: Vec<String>) -> Result<Vec<OsString>, ConfigError> {
    let out = |v: Vec<String>| v.into_iter().map(OsString::from).collect();
    let Some(sub) = args.get(1).and_then(|s| cmd.find_subcommand(s)) else {
        return Ok(out(args));
    };
    let path = match config_path(&args) {
        None => return Ok(out(args)),
        Some(p) => p?,
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| ConfigError(format!("cannot read config {path}: {e}")))?;
    let mut extra = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("{path}:{}: expected `key = value`", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .filter(|_| key != "config" && key != "help")
            .ok_or_else(|| ConfigError(format!("{path}:{}: unknown key `{key}`", n + 1)))?;
        if given(&args, &key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value {
                "true" => extra.push(format!("--{key}")),
                "false" => {}
                other => {
                    return Err(ConfigError(format!(
                        "{path}:{}: `{key}` expects true or false, got `{other}`",
                        n + 1
                    )))
                }
            },
            _ => {
                extra.push(format!("--{key}"));
                extra.extend(value.split_whitespace().map(str::to_string));
            }
        }
    }
    let mut merged = args[..2].to_vec();
    merged.extend(extra);
    merged.extend(args[2..].iter().cloned());
    Ok(out(merged))
}
