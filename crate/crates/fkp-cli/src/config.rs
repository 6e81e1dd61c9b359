//! Line-based `key = value` configuration files with `#` comments.
//!
//! Keys match the command-line flag names (with `-` or `_` interchangeable);
//! flags given on the command line override file values.

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct Config {
    map: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn canon(key: &str) -> String {
    key.trim().replace('-', "_").to_ascii_lowercase()
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, '=');
            let key = parts.next().unwrap_or("").trim();
            let value = parts
                .next()
                .ok_or_else(|| {
                    ConfigError(format!("line {}: expected `key = value`", lineno + 1))
                })?
                .trim();
            if key.is_empty() {
                return Err(ConfigError(format!("line {}: empty key", lineno + 1)));
            }
            map.insert(canon(key), value.to_string());
        }
        Ok(Config { map })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.map.get(&canon(key)).map(|s| s.as_str())
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get_str(key) {
            None => Ok(None),
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| ConfigError(format!("cannot parse {key} = {s:?}"))),
        }
    }
}

/// flag value, else config value, else default
pub fn pick<T: Clone + std::str::FromStr>(
    flag: &Option<T>,
    cfg: &Config,
    key: &str,
    default: T,
) -> Result<T, ConfigError> {
    if let Some(v) = flag {
        return Ok(v.clone());
    }
    Ok(cfg.get::<T>(key)?.unwrap_or(default))
}

/// flag value, else config value, else error (no sensible default)
pub fn require<T: Clone + std::str::FromStr>(
    flag: &Option<T>,
    cfg: &Config,
    key: &str,
) -> Result<T, ConfigError> {
    if let Some(v) = flag {
        return Ok(v.clone());
    }
    cfg.get::<T>(key)?
        .ok_or_else(|| ConfigError(format!("missing required parameter {key}")))
}
