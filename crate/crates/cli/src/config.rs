//! Optional JSON config file. Flags override it, and it overrides defaults.
//!
//! ```json
//! { "seed": 3, "train": { "epochs": 8 }, "dataset": { "n": 50, "jobs": 4 } }
//! ```
//!
//! Keys inside a command's section use the long flag name with `_` for `-`.
//! A top-level key applies to every command that has that option.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

#[derive(Debug, Default)]
pub struct Config {
    root: Map<String, Value>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        match serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?
        {
            Value::Object(root) => Ok(Self { root }),
            _ => bail!("config {}: expected a JSON object", path.display()),
        }
    }

    /// The value for `key` in `section`, falling back to the top level.
    pub fn get<T: DeserializeOwned>(&self, section: &str, key: &str) -> Result<Option<T>> {
        let scoped = self
            .root
            .get(section)
            .and_then(Value::as_object)
            .and_then(|s| s.get(key));
        let Some(v) = scoped.or_else(|| self.root.get(key)) else {
            return Ok(None);
        };
        serde_json::from_value(v.clone())
            .map(Some)
            .with_context(|| format!("config key {section}.{key}"))
    }

    /// `flag`, else the config value, else `default`.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, section: &str, key: &str, default: T) -> Result<T> {
        Ok(match flag {
            Some(v) => v,
            None => self.get(section, key)?.unwrap_or(default),
        })
    }

    /// Like [`Config::pick`] without a default.
    pub fn pick_opt<T: DeserializeOwned>(&self, flag: Option<T>, section: &str, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(section, key),
        }
    }
}
