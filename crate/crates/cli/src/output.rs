//! Stable on-disk formats: hand-rolled CSV with 17-significant-digit floats
//! and `\n` line endings, and sorted-key JSON, so identical runs produce
//! byte-identical files.

use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::config::CliError;

/// Full-precision decimal rendering (one digit before the point plus
/// sixteen after — 17 significant digits, enough to round-trip any f64).
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_text(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|err| CliError::Config(format!("cannot write {}: {err}", path.display())))
}

/// Pretty-prints with a trailing newline. Key order is alphabetical because
/// the JSON maps are tree-backed.
pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|err| CliError::Config(format!("cannot serialize {}: {err}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}
