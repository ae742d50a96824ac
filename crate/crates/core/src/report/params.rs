//! Flat key-value run parameters: config file first, command-line overrides
//! on top, defaults filled in on first read so the manifest records them.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    values: BTreeMap<String, Value>,
}

impl Params {
    /// Reads a flat JSON object. `schema_version` must match when present.
    pub fn from_config_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s).map_err(|e| Error::invalid(format!("config: {e}")))?;
        let Value::Object(map) = v else {
            return Err(Error::invalid("config must be a JSON object"));
        };
        let mut values = BTreeMap::new();
        for (k, v) in map {
            if k == "schema_version" {
                if v.as_u64() != Some(SCHEMA_VERSION) {
                    return Err(Error::invalid(format!("unsupported schema_version {v}")));
                }
                continue;
            }
            if v.is_object() {
                return Err(Error::invalid(format!(
                    "config key `{k}` is nested; the format is flat"
                )));
            }
            values.insert(k, v);
        }
        Ok(Self { values })
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_config_str(&s)
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.to_string(), v.into());
    }

    pub fn set_opt<T: Into<Value>>(&mut self, key: &str, v: Option<T>) {
        if let Some(v) = v {
            self.set(key, v);
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&Value> {
        self.values.get(key)
    }

    /// Errors on keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::invalid(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.values.entry(key.to_string()).or_insert_with(|| default.into());
        v.as_f64()
            .ok_or_else(|| Error::invalid(format!("`{key}` must be a number, got {v}")))
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        let v = self.values.entry(key.to_string()).or_insert_with(|| default.into());
        v.as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| Error::invalid(format!("`{key}` must be a non-negative integer, got {v}")))
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        let v = self.values.entry(key.to_string()).or_insert_with(|| default.into());
        v.as_u64()
            .ok_or_else(|| Error::invalid(format!("`{key}` must be a non-negative integer, got {v}")))
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> Result<String> {
        let v = self.values.entry(key.to_string()).or_insert_with(|| default.into());
        v.as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::invalid(format!("`{key}` must be a string, got {v}")))
    }

    pub fn str_opt(&self, key: &str) -> Result<Option<String>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(Error::invalid(format!("`{key}` must be a string, got {v}"))),
        }
    }

    /// A list of numbers, given either as a JSON array or a comma list.
    pub fn f64_list_or(&mut self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = self
            .values
            .entry(key.to_string())
            .or_insert_with(|| Value::from(default.to_vec()));
        let list = match v {
            Value::Array(items) => items.iter().map(Value::as_f64).collect::<Option<Vec<_>>>(),
            Value::String(s) => s.split(',').map(|p| p.trim().parse().ok()).collect(),
            Value::Number(n) => n.as_f64().map(|x| vec![x]),
            _ => None,
        }
        .ok_or_else(|| Error::invalid(format!("`{key}` must be a list of numbers, got {v}")))?;
        *v = Value::from(list.clone());
        Ok(list)
    }

    pub fn to_json(&self) -> Value {
        Value::Object(
            self.values
                .iter()
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect::<Map<_, _>>(),
        )
    }

    /// SHA-256 of the subcommand and the sorted parameters.
    pub fn hash(&self, subcommand: &str) -> String {
        let body = serde_json::json!({ "subcommand": subcommand, "parameters": self.to_json() });
        let digest = Sha256::digest(body.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
