//! Flat `key=value` configuration files.
//!
//! Each entry becomes `--key value` placed right after the subcommand, so
//! flags given on the command line come later and win. Unknown keys are
//! rejected by the argument parser like unknown flags.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Options that take a value before the subcommand name.
const GLOBAL_VALUED: [&str; 5] = ["--threads", "--seed", "--config", "--output", "--format"];

pub fn read_entries(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_entries(&text)
}

pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let key = key.trim();
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return Err(CliError::Usage(format!("config line {}: bad key '{key}'", no + 1)));
        }
        if key == "config" {
            return Err(CliError::Usage(format!("config line {}: config files cannot nest", no + 1)));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Index of the subcommand token, skipping global options and their values.
fn subcommand_at(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].to_string_lossy();
        if !tok.starts_with('-') {
            return Some(i);
        }
        i += if GLOBAL_VALUED.contains(&tok.as_ref()) { 2 } else { 1 };
    }
    None
}

/// The `--config` path, wherever it appears.
pub fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut found = None;
    let mut it = argv.iter().skip(1);
    while let Some(tok) = it.next() {
        let tok = tok.to_string_lossy();
        if tok == "--" {
            break;
        }
        if tok == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(p) = tok.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

/// `argv` with the entries spliced in after the subcommand token.
pub fn merge(argv: &[OsString], entries: &[(String, String)]) -> Vec<OsString> {
    let at = subcommand_at(argv).map_or(argv.len(), |i| i + 1);
    let mut out: Vec<OsString> = argv[..at].to_vec();
    for (k, v) in entries {
        out.push(format!("--{k}").into());
        out.push(v.into());
    }
    out.extend_from_slice(&argv[at..]);
    out
}
