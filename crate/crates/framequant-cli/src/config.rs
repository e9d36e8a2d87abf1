//! Flat `key = value` configuration files. Command-line flags override file
//! values, which override built-in defaults; the resolved configuration is
//! echoed into every JSON report.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!(
                    "config {}:{}: expected 'key = value', got '{line}'",
                    path.display(),
                    lineno + 1
                );
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(text) => match text.parse::<T>() {
                Ok(v) => Ok(Some(v)),
                Err(e) => bail!("config key '{key}': cannot parse '{text}': {e}"),
            },
        }
    }

    /// Resolve flag > config > default; error naming the key when required
    /// and absent.
    pub fn resolve<T: std::str::FromStr + Clone>(
        &self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(v) = self.parsed::<T>(key)? {
            return Ok(v);
        }
        match default {
            Some(v) => Ok(v),
            None => bail!("missing required parameter '{key}' (flag or config)"),
        }
    }
}

/// Parse a comma-separated coordinate list like `3.14,2.71`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let coords: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let coords = coords.with_context(|| format!("cannot parse vector '{text}'"))?;
    if coords.is_empty() {
        bail!("vector '{text}' is empty");
    }
    Ok(coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let dir = std::env::temp_dir().join("framequant-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.conf");
        std::fs::write(&path, "# comment\ndelta = 0.125\nn = 64\n\nx = 1.0,2.0\n").unwrap();
        let cfg = FileConfig::load(&path).unwrap();
        assert_eq!(cfg.resolve::<f64>("delta", None, None).unwrap(), 0.125);
        assert_eq!(cfg.resolve::<usize>("n", Some(32), None).unwrap(), 32);
        assert_eq!(cfg.resolve::<u64>("seed", None, Some(7)).unwrap(), 7);
        assert_eq!(parse_vector(cfg.raw("x").unwrap()).unwrap(), vec![1.0, 2.0]);
        assert!(cfg.resolve::<f64>("missing", None, None).is_err());
    }
}
