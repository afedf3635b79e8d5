//! `key=value` config files merged under explicit command-line flags.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Command};

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Invalid(String),
}

/// Parses the config file into `(key, value)` pairs in file order.
/// Blank lines and lines starting with `#` are skipped.
pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_pairs(&text).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))
}

fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(format!("line {}: empty key", lineno + 1));
        }
        pairs.push((key.to_owned(), value.trim().to_owned()));
    }
    Ok(pairs)
}

/// Turns config pairs into flags for subcommand `sub`. Rejects keys that are
/// not long options of that subcommand.
pub fn pairs_to_flags(cmd: &Command, sub: &str, pairs: &[(String, String)]) -> Result<Vec<OsString>, ConfigError> {
    let sub_cmd = cmd
        .find_subcommand(sub)
        .ok_or_else(|| ConfigError::Invalid(format!("unknown subcommand {sub:?}")))?;
    let mut flags = Vec::new();
    for (key, value) in pairs {
        let arg = sub_cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config" && key != "help")
            .ok_or_else(|| ConfigError::Invalid(format!("unknown config key {key:?} for {sub}")))?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" => flags.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(ConfigError::Invalid(format!(
                        "{key} must be true or false, got {value:?}"
                    )))
                }
            }
        } else {
            flags.push(format!("--{key}={value}").into());
        }
    }
    Ok(flags)
}

/// Value of the first `--config` option anywhere in `argv`.
pub fn find_config(argv: &[OsString]) -> Option<PathBuf> {
    let mut tokens = argv.iter().skip(1);
    while let Some(token) = tokens.next() {
        let text = token.to_string_lossy();
        if text == "--config" {
            return tokens.next().map(PathBuf::from);
        }
        if let Some(path) = text.strip_prefix("--config=") {
            return Some(PathBuf::from(path));
        }
    }
    None
}

/// Index and name of the subcommand in `argv`. Only `--config` may precede it.
pub fn split_at_subcommand(argv: &[OsString]) -> Option<(usize, String)> {
    let mut i = 1;
    while i < argv.len() {
        let token = argv[i].to_string_lossy();
        if token == "--config" {
            i += 2;
        } else if token.starts_with("--config=") {
            i += 1;
        } else if token.starts_with('-') {
            return None;
        } else {
            return Some((i, token.into_owned()));
        }
    }
    None
}
