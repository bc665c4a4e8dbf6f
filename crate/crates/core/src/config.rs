//! Flat key-value configuration files: one `key = value` per line, `#`
//! comments. Keys ending in `_over_gamma` are dimensionless multiples of the
//! atomic linewidth and are converted at resolution time.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Raw parsed configuration, insertion-order independent.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    map: BTreeMap<String, String>,
    /// Directory of the source file; anchors relative paths in values.
    base_dir: Option<std::path::PathBuf>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(i) => &line[..i],
                None => line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(RawConfig {
            map,
            base_dir: None,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut raw = Self::parse(&text)?;
        raw.base_dir = path.parent().map(|p| p.to_path_buf());
        Ok(raw)
    }

    /// A path-valued key, resolved against the config file's directory.
    pub fn path(&self, key: &str) -> Option<std::path::PathBuf> {
        self.map.get(key).map(|v| {
            let p = std::path::PathBuf::from(v);
            match (&self.base_dir, p.is_relative()) {
                (Some(base), true) => base.join(p),
                _ => p,
            }
        })
    }

    /// One number per line, `#` comments allowed.
    pub fn load_column_csv(path: &Path) -> Result<Vec<f64>> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut out = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            out.push(line.parse::<f64>().map_err(|_| {
                Error::Config(format!(
                    "{}:{}: `{line}` is not a number",
                    path.display(),
                    lineno + 1
                ))
            })?);
        }
        Ok(out)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Config(format!("{key}: `{v}` is not a number"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{key}: `{v}` is not a count"))),
        }
    }

    /// Rate-like quantity: `key` in rad/s, or `key_over_gamma` scaled by Γ.
    pub fn rate(&self, key: &str, gamma: f64) -> Result<Option<f64>> {
        let over = format!("{key}_over_gamma");
        match (self.f64(key)?, self.f64(&over)?) {
            (Some(_), Some(_)) => Err(Error::Config(format!(
                "both {key} and {over} supplied"
            ))),
            (Some(v), None) => Ok(Some(v)),
            (None, Some(v)) => Ok(Some(v * gamma)),
            (None, None) => Ok(None),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }
}
