//! Flat key-value settings: command-line flag, then the subcommand's table in
//! the config file, then top-level keys, then the built-in default.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::CliError;

pub trait Setting: Sized {
    fn from_value(v: &Value) -> Option<Self>;
    fn to_value(&self) -> Value;
}

impl Setting for u64 {
    fn from_value(v: &Value) -> Option<Self> {
        v.as_integer().and_then(|i| u64::try_from(i).ok())
    }
    fn to_value(&self) -> Value {
        // Seeds above i64::MAX are stored as strings to survive the round trip.
        i64::try_from(*self).map(Value::Integer).unwrap_or_else(|_| Value::String(self.to_string()))
    }
}

impl Setting for usize {
    fn from_value(v: &Value) -> Option<Self> {
        v.as_integer().and_then(|i| usize::try_from(i).ok())
    }
    fn to_value(&self) -> Value {
        Value::Integer(*self as i64)
    }
}

impl Setting for i32 {
    fn from_value(v: &Value) -> Option<Self> {
        v.as_integer().and_then(|i| i32::try_from(i).ok())
    }
    fn to_value(&self) -> Value {
        Value::Integer(i64::from(*self))
    }
}

impl Setting for f64 {
    fn from_value(v: &Value) -> Option<Self> {
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }
    fn to_value(&self) -> Value {
        Value::Float(*self)
    }
}

impl Setting for bool {
    fn from_value(v: &Value) -> Option<Self> {
        v.as_bool()
    }
    fn to_value(&self) -> Value {
        Value::Boolean(*self)
    }
}

impl Setting for String {
    fn from_value(v: &Value) -> Option<Self> {
        v.as_str().map(str::to_string)
    }
    fn to_value(&self) -> Value {
        Value::String(self.clone())
    }
}

impl Setting for PathBuf {
    fn from_value(v: &Value) -> Option<Self> {
        v.as_str().map(PathBuf::from)
    }
    fn to_value(&self) -> Value {
        Value::String(self.display().to_string())
    }
}

impl<T: Setting> Setting for Vec<T> {
    fn from_value(v: &Value) -> Option<Self> {
        v.as_array()?.iter().map(T::from_value).collect()
    }
    fn to_value(&self) -> Value {
        Value::Array(self.iter().map(T::to_value).collect())
    }
}

pub struct Resolver {
    section: &'static str,
    file: Table,
    used: BTreeSet<String>,
    resolved: Table,
}

impl Resolver {
    pub fn new(section: &'static str, config: Option<&Path>) -> Result<Self, CliError> {
        let mut file = Table::new();
        if let Some(path) = config {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let table: Table = text.parse().map_err(|e| CliError::io(path, e))?;
            for (k, v) in table {
                match v {
                    Value::Table(t) if k == section => file.extend(t),
                    Value::Table(_) => {}
                    v => {
                        file.entry(k).or_insert(v);
                    }
                }
            }
        }
        Ok(Resolver { section, file, used: BTreeSet::new(), resolved: Table::new() })
    }

    fn lookup<T: Setting>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        self.used.insert(key.to_string());
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => T::from_value(v)
                .or_else(|| v.as_str().and_then(|s| T::from_value(&Value::Integer(s.parse().ok()?))))
                .map(Some)
                .ok_or_else(|| CliError::Input(format!("config key `{key}` has an invalid value: {v}"))),
        }
    }

    /// Setting with a default.
    pub fn get<T: Setting>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        let v = self.lookup(key, flag)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_value());
        Ok(v)
    }

    /// Setting without a default; absence is a usage error.
    pub fn require<T: Setting>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        let v = self
            .lookup(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("{}: missing required setting `{key}`", self.section)))?;
        self.resolved.insert(key.to_string(), v.to_value());
        Ok(v)
    }

    /// Optional setting, recorded only when present.
    pub fn optional<T: Setting>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let v = self.lookup(key, flag)?;
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.to_value());
        }
        Ok(v)
    }

    /// Rejects config keys that no setting consumed, then returns the
    /// resolved table.
    pub fn finish(self) -> Result<Table, CliError> {
        if let Some(k) = self.file.keys().find(|k| !self.used.contains(*k)) {
            return Err(CliError::Input(format!("{}: unknown config key `{k}`", self.section)));
        }
        Ok(self.resolved)
    }
}

pub fn write_resolved(table: &Table, section: &str, path: &Path) -> Result<(), CliError> {
    let mut doc = Table::new();
    doc.insert(section.to_string(), Value::Table(table.clone()));
    let text = toml::to_string(&doc).map_err(|e| CliError::Invariant(e.to_string()))?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
