//! Flat key-value run configuration: a config file mirrors the CLI flags
//! (`key = value` per line, `#` comments), and explicit flags override
//! file entries. Archiving the file alongside the outputs reproduces the
//! run.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parsed config file contents.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Parse `key = value` lines; `#` starts a comment, blank lines are
    /// ignored, later duplicates win.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    msg: format!("config line {}: expected `key = value`, got {raw:?}", lineno + 1),
                });
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile { path: path.to_path_buf() });
        }
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Resolve a value: flag beats file beats default. A missing required
    /// key (no default) is a config error naming the key.
    pub fn resolve<T: FromStr + Clone>(&self, key: &str, flag: Option<T>, default: Option<T>) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.entries.get(key) {
            return raw
                .parse::<T>()
                .map_err(|_| Error::Config { msg: format!("config key {key:?}: cannot parse {raw:?}") });
        }
        default.ok_or_else(|| Error::Config { msg: format!("missing required option --{key} (or config key {key})") })
    }

    /// Resolve an optional value with no default.
    pub fn resolve_opt<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        if let Some(v) = flag {
            return Ok(Some(v));
        }
        match self.entries.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config { msg: format!("config key {key:?}: cannot parse {raw:?}") }),
            None => Ok(None),
        }
    }

    /// Resolve a path that must exist on disk.
    pub fn resolve_existing_path(&self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
        let path = self.resolve::<PathBuf>(key, flag, None)?;
        if !path.exists() {
            return Err(Error::MissingFile { path });
        }
        Ok(path)
    }

    /// Resolve an optional path that must exist when given.
    pub fn resolve_existing_path_opt(&self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        match self.resolve_opt::<PathBuf>(key, flag)? {
            Some(path) if !path.exists() => Err(Error::MissingFile { path }),
            other => Ok(other),
        }
    }
}

/// Parse a `lon_min,lon_max,lat_min,lat_max` bbox string.
pub fn parse_bbox(text: &str) -> Result<crate::geom::BoundingBox> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Config { msg: format!("bbox must be lon_min,lon_max,lat_min,lat_max, got {text:?}") });
    }
    let mut vals = [0.0f64; 4];
    for (v, part) in vals.iter_mut().zip(&parts) {
        *v = part.parse().map_err(|_| Error::Config { msg: format!("bbox component {part:?} is not a number") })?;
    }
    crate::geom::BoundingBox::new(vals[0], vals[1], vals[2], vals[3])
}

/// Parse comma-separated hidden layer sizes, e.g. "10" or "16,8".
pub fn parse_hidden(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config { msg: format!("hidden size {part:?} is not a count") })
        })
        .collect()
}
