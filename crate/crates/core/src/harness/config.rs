use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Flat `key = value` settings file. Blank lines and `#` comments are
/// ignored; keys use the long flag names (`dump-transcripts` or
/// `dump_transcripts`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(Error::parse(idx + 1, "empty key"));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::parse(idx + 1, format!("duplicate key {key:?}")));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get_str(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::config(format!("bad value {v:?} for {key} in config file")))
            })
            .transpose()
    }

    /// `flag`, else the file's value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let cfg = ConfigFile::parse("# run\nn = 64\n\nseed=7\ndump_transcripts = out/t\n").unwrap();
        assert_eq!(cfg.get::<usize>("n").unwrap(), Some(64));
        assert_eq!(cfg.get_str("dump-transcripts"), Some("out/t"));
        assert_eq!(cfg.resolve(Some(3u64), "seed", 0).unwrap(), 3);
        assert_eq!(cfg.resolve(None, "seed", 0u64).unwrap(), 7);
        assert_eq!(cfg.resolve(None, "trials", 100usize).unwrap(), 100);
        assert!(cfg.get::<usize>("dump-transcripts").is_err());
    }

    #[test]
    fn reports_bad_lines() {
        match ConfigFile::parse("n = 4\noops\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(ConfigFile::parse("n = 4\nn = 5\n").is_err());
    }
}
