//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Each subcommand reads
//! the keys it knows through a [`Reader`]; every problem (unknown key, bad
//! number, out-of-range value) is collected and reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub key: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration ({} problem", self.issues.len())?;
        if self.issues.len() != 1 {
            write!(f, "s")?;
        }
        write!(f, ")")?;
        for i in &self.issues {
            write!(f, "\n  {}: {}", i.key, i.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn single(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            issues: vec![Issue {
                key: key.to_string(),
                message: message.into(),
            }],
        }
    }
}

/// Raw key/value pairs in file order of first appearance.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut issues = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                issues.push(Issue {
                    key: format!("line {}", no + 1),
                    message: "expected key = value".into(),
                });
                continue;
            };
            let key = k.trim().to_string();
            if key.is_empty() {
                issues.push(Issue {
                    key: format!("line {}", no + 1),
                    message: "empty key".into(),
                });
                continue;
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                issues.push(Issue {
                    key,
                    message: format!("duplicate key on line {}", no + 1),
                });
            }
        }
        if issues.is_empty() {
            Ok(Config { entries })
        } else {
            Err(ConfigError { issues })
        }
    }

    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::single("config", format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn reader(&self) -> Reader<'_> {
        Reader {
            config: self,
            used: Vec::new(),
            issues: Vec::new(),
            effective: Vec::new(),
        }
    }
}

/// Typed access to a [`Config`] that remembers which keys were read.
pub struct Reader<'a> {
    config: &'a Config,
    used: Vec<String>,
    issues: Vec<Issue>,
    effective: Vec<(String, String)>,
}

impl Reader<'_> {
    fn raw(&mut self, key: &str) -> Option<&str> {
        self.used.push(key.to_string());
        self.config.get(key)
    }

    fn fail(&mut self, key: &str, message: String) {
        self.issues.push(Issue {
            key: key.to_string(),
            message,
        });
    }

    fn record(&mut self, key: &str, value: String) {
        self.effective.push((key.to_string(), value));
    }

    /// A scalar in `[lo, hi]`, or `default` when absent.
    pub fn num<T>(&mut self, key: &str, default: T, lo: T, hi: T) -> T
    where
        T: FromStr + PartialOrd + Copy + fmt::Display,
    {
        let value = match self.raw(key).map(str::to_string) {
            None => default,
            Some(s) => match s.parse::<T>() {
                Ok(v) => v,
                Err(_) => {
                    self.fail(key, format!("cannot parse {s:?} as a number"));
                    return default;
                }
            },
        };
        if !(value >= lo && value <= hi) {
            self.fail(key, format!("{value} is outside [{lo}, {hi}]"));
        }
        self.record(key, value.to_string());
        value
    }

    /// Like [`Reader::num`] for floats, additionally rejecting NaN.
    pub fn real(&mut self, key: &str, default: f64, lo: f64, hi: f64) -> f64 {
        let v = self.num(key, default, lo, hi);
        if v.is_nan() {
            self.fail(key, "NaN is not allowed".into());
        }
        v
    }

    pub fn flag(&mut self, key: &str, default: bool) -> bool {
        let value = match self.raw(key).map(str::to_string) {
            None => default,
            Some(s) => match s.as_str() {
                "true" | "yes" | "1" => true,
                "false" | "no" | "0" => false,
                _ => {
                    self.fail(key, format!("{s:?} is not a boolean"));
                    default
                }
            },
        };
        self.record(key, value.to_string());
        value
    }

    /// One of `choices`.
    pub fn choice(&mut self, key: &str, default: &str, choices: &[&str]) -> String {
        let value = self.raw(key).unwrap_or(default).to_string();
        if !choices.contains(&value.as_str()) {
            self.fail(key, format!("{value:?} is not one of {}", choices.join(", ")));
        }
        self.record(key, value.clone());
        value
    }

    /// Free text, recorded verbatim.
    pub fn text(&mut self, key: &str, default: &str) -> String {
        let value = self.raw(key).unwrap_or(default).to_string();
        self.record(key, value.clone());
        value
    }

    /// A comma-separated, nonempty list with every item in `[lo, hi]`.
    pub fn list<T>(&mut self, key: &str, default: &[T], lo: T, hi: T) -> Vec<T>
    where
        T: FromStr + PartialOrd + Copy + fmt::Display,
    {
        let values = match self.raw(key).map(str::to_string) {
            None => default.to_vec(),
            Some(s) => {
                let mut out = Vec::new();
                for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
                    match item.parse::<T>() {
                        Ok(v) => out.push(v),
                        Err(_) => {
                            self.fail(key, format!("cannot parse list item {item:?}"));
                            return default.to_vec();
                        }
                    }
                }
                out
            }
        };
        if values.is_empty() {
            self.fail(key, "list must not be empty".into());
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= lo && **v <= hi)) {
            self.fail(key, format!("list item {bad} is outside [{lo}, {hi}]"));
        }
        let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.record(key, joined.join(","));
        values
    }

    /// Records an issue that involves a relationship between keys.
    pub fn check(&mut self, ok: bool, key: &str, message: &str) {
        if !ok {
            self.fail(key, message.to_string());
        }
    }

    /// Reports unknown keys together with every other problem, or returns
    /// the effective configuration with defaults filled in.
    pub fn finish(mut self) -> Result<Config, ConfigError> {
        let unknown: Vec<String> = self
            .config
            .entries
            .keys()
            .filter(|k| !self.used.contains(k))
            .cloned()
            .collect();
        for k in unknown {
            self.fail(&k, "unknown key".into());
        }
        if !self.issues.is_empty() {
            self.issues.sort_by(|a, b| a.key.cmp(&b.key));
            return Err(ConfigError {
                issues: self.issues,
            });
        }
        let mut effective = Config::default();
        for (k, v) in self.effective {
            effective.set(&k, v);
        }
        Ok(effective)
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
