//! Flat key-value config file support.
//!
//! Every flag has a config equivalent (same name, kebab-case); values given
//! on the command line override file values. Lines are `KEY=VALUE`, `#`
//! starts a comment, blank lines are ignored.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected KEY=VALUE, got {line:?}",
                    path.display(),
                    lineno + 1
                ));
            };
            values.insert(key.trim().to_owned(), value.trim().to_owned());
        }
        Ok(FileConfig { values })
    }

    /// Flag value if present, else the config-file value, else the default.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(v),
            None => match self.values.get(key) {
                Some(raw) => raw.parse().map_err(|e| format!("config key {key}={raw}: {e}")),
                None => Ok(default),
            },
        }
    }

    /// Like [`resolve`](Self::resolve) but without a default.
    pub fn resolve_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => match self.values.get(key) {
                Some(raw) => {
                    raw.parse().map(Some).map_err(|e| format!("config key {key}={raw}: {e}"))
                }
                None => Ok(None),
            },
        }
    }
}

/// Comma-separated list of sample sizes, e.g. `16,32,64`.
pub fn parse_n_list(raw: &str) -> Result<Vec<u64>, String> {
    let ns: Vec<u64> = raw
        .split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| format!("bad n value {s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if ns.is_empty() {
        return Err("need at least one n value".into());
    }
    let mut sorted = ns.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != ns.len() {
        return Err("n values must be distinct".into());
    }
    if ns.iter().any(|&n| n < 2) {
        return Err("n values must be >= 2".into());
    }
    Ok(ns)
}
