//! Flat `key = value` configuration with flag overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use oufield::{HurstVector, RsOptions, ThetaVector};

use crate::error::{config, CliResult};

/// Every key accepted in a configuration file or as a flag.
pub const KEYS: &[&str] = &[
    "dim",
    "theta",
    "hurst",
    "lower",
    "upper",
    "cells",
    "replications",
    "seed",
    "truncation",
    "refinements",
    "base_cells",
    "extrapolate",
    "tolerance",
    "alpha",
    "out",
    "kind",
    "g",
    "f",
    "field",
    "apex",
    "axes",
    "driver",
    "transform",
    "suite",
    "source",
];

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "OUFIELD_OUT_DIR";

const DEFAULT_OUT: &str = "oufield-out";

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(config(format!("line {}: unknown key `{key}`", n + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(config(format!("line {}: `{key}` given twice", n + 1)));
        }
    }
    Ok(map)
}

pub fn read(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// Resolved settings for one command: flags over file entries over defaults.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(file: BTreeMap<String, String>, flags: BTreeMap<String, String>) -> Self {
        let mut values = file;
        values.extend(flags);
        Self { values }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The resolved entries, for run manifests.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str, raw: &str) -> CliResult<T> {
        raw.trim()
            .parse()
            .map_err(|_| config(format!("`{key}`: cannot parse `{raw}`")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.get(key) {
            Some(v) => {
                let x: f64 = self.parse_num(key, v)?;
                if !x.is_finite() {
                    return Err(config(format!("`{key}` must be finite")));
                }
                Ok(x)
            }
            None => Ok(default),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> CliResult<usize> {
        self.get(key).map_or(Ok(default), |v| self.parse_num(key, v))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> CliResult<u64> {
        self.get(key).map_or(Ok(default), |v| self.parse_num(key, v))
    }

    pub fn bool_or(&self, key: &str, default: bool) -> CliResult<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(config(format!("`{key}`: expected true or false, got `{v}`"))),
        }
    }

    /// A value from a fixed set of names.
    pub fn choice<'a>(&'a self, key: &str, default: &'a str, allowed: &[&str]) -> CliResult<&'a str> {
        let v = self.get(key).unwrap_or(default);
        if allowed.contains(&v) {
            Ok(v)
        } else {
            Err(config(format!(
                "`{key}` must be one of {}, got `{v}`",
                allowed.join(", ")
            )))
        }
    }

    fn raw_list(&self, key: &str) -> CliResult<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        let xs = v
            .split(',')
            .map(|p| self.parse_num::<f64>(key, p))
            .collect::<CliResult<Vec<f64>>>()?;
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(config(format!("`{key}` must be finite")));
        }
        Ok(Some(xs))
    }

    /// `dim` if set, else the length of the first list-valued key present,
    /// else 2.
    pub fn dim(&self) -> CliResult<usize> {
        if let Some(v) = self.get("dim") {
            let d: usize = self.parse_num("dim", v)?;
            if d == 0 || d > oufield::MAX_DIM {
                return Err(config(format!("`dim` must lie in 1..={}", oufield::MAX_DIM)));
            }
            return Ok(d);
        }
        for key in ["theta", "hurst", "apex", "lower", "upper"] {
            if let Some(xs) = self.raw_list(key)? {
                if xs.len() > 1 {
                    return Ok(xs.len());
                }
            }
        }
        Ok(2)
    }

    /// A per-axis list. A single value is repeated on every axis.
    pub fn list_or(&self, key: &str, default: f64) -> CliResult<Vec<f64>> {
        let dim = self.dim()?;
        match self.raw_list(key)? {
            None => Ok(vec![default; dim]),
            Some(xs) if xs.len() == 1 => Ok(vec![xs[0]; dim]),
            Some(xs) if xs.len() == dim => Ok(xs),
            Some(xs) => Err(config(format!("`{key}` has {} entries for dimension {dim}", xs.len()))),
        }
    }

    pub fn theta(&self) -> CliResult<ThetaVector> {
        ThetaVector::new(self.list_or("theta", 1.0)?).map_err(|e| config(format!("`theta`: {e}")))
    }

    pub fn hurst(&self) -> CliResult<HurstVector> {
        HurstVector::new(self.list_or("hurst", 0.5)?).map_err(|e| config(format!("`hurst`: {e}")))
    }

    /// Cells per axis, at least 2 on each.
    pub fn cells_or(&self, default: usize) -> CliResult<Vec<usize>> {
        let dim = self.dim()?;
        let cells: Vec<usize> = match self.get("cells") {
            None => vec![default; dim],
            Some(v) => {
                let xs = v
                    .split(',')
                    .map(|p| self.parse_num::<usize>("cells", p))
                    .collect::<CliResult<Vec<usize>>>()?;
                match xs.len() {
                    1 => vec![xs[0]; dim],
                    n if n == dim => xs,
                    n => return Err(config(format!("`cells` has {n} entries for dimension {dim}"))),
                }
            }
        };
        if cells.iter().any(|&c| c < 2) {
            return Err(config("`cells` must be at least 2 on every axis"));
        }
        Ok(cells)
    }

    pub fn replications_or(&self, default: usize) -> CliResult<usize> {
        let m = self.usize_or("replications", default)?;
        if m == 0 {
            return Err(config("`replications` must be at least 1"));
        }
        Ok(m)
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.u64_or("seed", 0)
    }

    pub fn rs_options(&self) -> CliResult<RsOptions> {
        let opts = RsOptions {
            refinements: self.usize_or("refinements", 4)?,
            base_cells: self.usize_or("base_cells", 8)?,
            extrapolate: self.bool_or("extrapolate", false)?,
            ..RsOptions::default()
        };
        if opts.refinements == 0 || opts.base_cells == 0 {
            return Err(config("`refinements` and `base_cells` must be positive"));
        }
        Ok(opts)
    }

    /// `out`, else the environment default, else `oufield-out`.
    pub fn out_dir(&self) -> PathBuf {
        if let Some(v) = self.get("out") {
            return PathBuf::from(v);
        }
        std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
    }
}
