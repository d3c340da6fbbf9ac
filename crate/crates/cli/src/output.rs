//! Column tables with self-describing headers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::{RunConfig, CONFIG_BEGIN, CONFIG_END};
use crate::error::CliError;

/// Nine significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), num)
}

/// Header lines: program and version, command, seed, the full resolved
/// configuration, then the column names.
pub fn header(command: &str, cfg: &RunConfig, columns: &[&str]) -> String {
    let mut h = format!(
        "# dualcell {} {command}\n# seed {}\n{CONFIG_BEGIN}\n",
        dualcell_core::VERSION,
        cfg.seed
    );
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            h.push_str("#\n");
        } else {
            h.push_str("# ");
            h.push_str(line);
            h.push('\n');
        }
    }
    h.push_str(CONFIG_END);
    h.push('\n');
    h.push_str("# ");
    h.push_str(&columns.join("\t"));
    h.push('\n');
    h
}

pub fn write_table<I>(path: &Path, header: &str, rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut buf = String::from(header);
    for row in rows {
        buf.push_str(&row.join("\t"));
        buf.push('\n');
    }
    write_file(path, buf.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_nine_digits() {
        assert_eq!(num(1.0), "1.00000000e0");
        assert_eq!(num(-0.000_123_456_789_12), "-1.23456789e-4");
        assert_eq!(opt(None), "nan");
    }

    #[test]
    fn header_lines_are_comments() {
        let h = header("simulate", &RunConfig::default(), &["t_s", "mx"]);
        assert!(h.lines().all(|l| l.starts_with('#')));
        assert!(h.ends_with("# t_s\tmx\n"));
    }
}
