//! Report files. Every file is written once, through a temporary file and a
//! rename, so readers never see a partial report.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.display().to_string(),
        source,
    })
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let mut body = serde_json::to_vec_pretty(value).map_err(oufield::Error::from)?;
    body.push(b'\n');
    oufield::grid::write_atomic(&path, &body)?;
    Ok(path)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> CliResult<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    oufield::grid::write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// One named numeric check against a limit.
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            pass: value <= limit,
        }
    }

    /// A yes/no condition; `value` is 1 for true.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            limit: 1.0,
            pass: ok,
        }
    }
}

pub fn check_table(checks: &[Check]) -> String {
    let mut out = format!("  {:<48} {:>12} {:>12}  result\n", "check", "value", "limit");
    for c in checks {
        out.push_str(&format!(
            "  {:<48} {:>12.4e} {:>12.4e}  {}\n",
            c.name,
            c.value,
            c.limit,
            if c.pass { "pass" } else { "FAIL" }
        ));
    }
    out
}
