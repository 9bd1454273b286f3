//! Option resolution: command-line flag, then the command's table in the
//! config file, then the file's top level, then the built-in default.
//! Every resolved value is recorded for the run's config snapshot.

use std::path::{Path, PathBuf};

use toml::{Table, Value};

use super::CliError;

pub trait ConfValue: Sized {
    fn from_toml(v: &Value) -> Option<Self>;
    fn to_toml(&self) -> Value;
}

impl ConfValue for f64 {
    fn from_toml(v: &Value) -> Option<Self> {
        v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
    }
    fn to_toml(&self) -> Value {
        Value::Float(*self)
    }
}

impl ConfValue for u64 {
    fn from_toml(v: &Value) -> Option<Self> {
        v.as_integer().and_then(|i| u64::try_from(i).ok())
    }
    fn to_toml(&self) -> Value {
        Value::Integer(*self as i64)
    }
}

impl ConfValue for usize {
    fn from_toml(v: &Value) -> Option<Self> {
        v.as_integer().and_then(|i| usize::try_from(i).ok())
    }
    fn to_toml(&self) -> Value {
        Value::Integer(*self as i64)
    }
}

impl ConfValue for bool {
    fn from_toml(v: &Value) -> Option<Self> {
        v.as_bool()
    }
    fn to_toml(&self) -> Value {
        Value::Boolean(*self)
    }
}

impl ConfValue for String {
    fn from_toml(v: &Value) -> Option<Self> {
        v.as_str().map(String::from)
    }
    fn to_toml(&self) -> Value {
        Value::String(self.clone())
    }
}

impl ConfValue for PathBuf {
    fn from_toml(v: &Value) -> Option<Self> {
        v.as_str().map(PathBuf::from)
    }
    fn to_toml(&self) -> Value {
        Value::String(self.display().to_string())
    }
}

impl<T: ConfValue> ConfValue for Vec<T> {
    fn from_toml(v: &Value) -> Option<Self> {
        v.as_array()?.iter().map(T::from_toml).collect()
    }
    fn to_toml(&self) -> Value {
        Value::Array(self.iter().map(T::to_toml).collect())
    }
}

pub struct Conf {
    file: Table,
    section: String,
    effective: Table,
}

impl Conf {
    pub fn load(path: Option<&Path>, section: &str) -> Result<Self, CliError> {
        let file = match path {
            None => Table::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                text.parse::<Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
        };
        Ok(Conf {
            file,
            section: section.to_string(),
            effective: Table::new(),
        })
    }

    fn lookup(&self, key: &str) -> Option<&Value> {
        self.file
            .get(&self.section)
            .and_then(Value::as_table)
            .and_then(|t| t.get(key))
            .or_else(|| self.file.get(key).filter(|v| !v.is_table()))
    }

    pub fn value<T: ConfValue>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.lookup(key) {
                None => None,
                Some(raw) => Some(
                    T::from_toml(raw)
                        .ok_or_else(|| CliError::Config(format!("config key {key:?} has the wrong type")))?,
                ),
            },
        };
        if let Some(v) = &v {
            self.effective.insert(key.to_string(), v.to_toml());
        }
        Ok(v)
    }

    pub fn or<T: ConfValue>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        match self.value(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.effective.insert(key.to_string(), default.to_toml());
                Ok(default)
            }
        }
    }

    pub fn required<T: ConfValue>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        self.value(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required option --{}", key.replace('_', "-"))))
    }

    /// A path option that must name an existing file or directory.
    pub fn existing(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        let p: PathBuf = self.required(key, flag)?;
        check_exists(&p)?;
        Ok(p)
    }

    /// Boolean switch: set on the command line, or read from the config.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool, CliError> {
        self.or(key, flag.then_some(true), false)
    }

    pub fn snapshot(&self) -> &Table {
        &self.effective
    }
}

pub fn check_exists(p: &Path) -> Result<(), CliError> {
    if p.exists() {
        Ok(())
    } else {
        Err(CliError::MissingPath(p.display().to_string()))
    }
}
