//! Flat `key=value` configuration files with dotted section prefixes.
//!
//! ```text
//! # comment
//! traffic.q1=0.5
//! links.noise_power=0.00625
//! include=profiles.conf
//! ```
//!
//! `include=PATH` splices another file in place (relative to the including
//! file). Later keys override earlier ones.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

pub(crate) fn parse_pairs(path: &Path, text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::parse(
                path,
                format!("line {}: expected key=value, found `{line}`", lineno + 1),
            ));
        };
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::parse(path, format!("line {}: empty key", lineno + 1)));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
    origin: PathBuf,
}

impl ConfigMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut map = ConfigMap {
            origin: path.to_path_buf(),
            ..Default::default()
        };
        map.load_into(path, 0)?;
        Ok(map)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let origin = PathBuf::from("<inline>");
        let mut map = ConfigMap {
            origin: origin.clone(),
            ..Default::default()
        };
        for (k, v) in parse_pairs(&origin, text)? {
            if k == "include" {
                return Err(Error::parse(&origin, "include is only allowed in files"));
            }
            map.entries.insert(k, v);
        }
        Ok(map)
    }

    fn load_into(&mut self, path: &Path, depth: usize) -> Result<()> {
        if depth > 8 {
            return Err(Error::parse(path, "include nesting too deep"));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (k, v) in parse_pairs(path, &text)? {
            if k == "include" {
                let base = path.parent().unwrap_or(Path::new("."));
                self.load_into(&base.join(&v), depth + 1)?;
            } else {
                self.entries.insert(k, v);
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Interprets `raw` as a path relative to the directory of the loaded file.
    pub fn resolve(&self, raw: &str) -> PathBuf {
        let p = Path::new(raw);
        match self.origin.parent() {
            Some(dir) if p.is_relative() && self.origin.is_file() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                Error::Config(format!("{}: `{key}={v}` has the wrong type", self.origin.display()))
            }),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list, or `start:stop:step` for an inclusive range.
    pub fn get_grid(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.entries.get(key).map(|v| parse_grid(v)).transpose()
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.entries.get(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| s.trim().parse::<T>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Some)
            .map_err(|_| Error::Config(format!("`{key}={v}` is not a valid list")))
    }
}

/// Parses `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("invalid grid `{spec}`"));
    let grid = if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // Index-based so that the grid does not accumulate rounding error.
        (0..count)
            .map(|i| {
                let x = start + i as f64 * step;
                (x * 1e12).round() / 1e12
            })
            .collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?
    };
    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    Ok(grid)
}
