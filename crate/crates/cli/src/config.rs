//! Run configuration: a flat `key = value` file or a JSON object, with
//! command-line flags taking precedence.
//!
//! A JSON summary written by any subcommand carries its resolved settings
//! under `"config"`, so passing the summary back through `--config`
//! reproduces the run.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

pub type Entries = Map<String, Value>;

pub fn load(path: &Path) -> Result<Entries, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read `{}`: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("`{}`: {e}", path.display())))?;
        let Value::Object(mut obj) = value else { unreachable!("text starts with an object") };
        return match obj.remove("config") {
            Some(Value::Object(inner)) => Ok(inner),
            Some(_) => Err(CliError::invalid("config", "must be a JSON object")),
            None => Ok(obj),
        };
    }
    parse_key_values(&text)
}

/// One `key = value` per line; `#` starts a comment. Values are read as JSON
/// scalars when they parse as such and as plain strings otherwise.
pub fn parse_key_values(text: &str) -> Result<Entries, CliError> {
    let mut entries = Entries::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let parsed = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_owned()));
        if entries.insert(key.to_owned(), parsed).is_some() {
            return Err(CliError::invalid(key, "given more than once"));
        }
    }
    Ok(entries)
}

/// Overlays the flags that were given onto the file entries and decodes the
/// result. Unknown keys are rejected by the target type.
pub fn resolve<T: DeserializeOwned, F: Serialize>(mut file: Entries, flags: &F) -> Result<T, CliError> {
    let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))? else {
        unreachable!("flag sets serialize to objects")
    };
    file.extend(given.into_iter().filter(|(_, v)| !v.is_null()));
    serde_path_to_error::deserialize(Value::Object(file)).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner().to_string();
        if key == "." {
            CliError::Config(inner)
        } else {
            CliError::invalid(&key, inner)
        }
    })
}

/// Accepts `[1, 2]`, `"1,2"` or a bare number.
pub fn reals<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Form {
        List(Vec<f64>),
        One(f64),
        Text(String),
    }
    match Form::deserialize(d)? {
        Form::List(v) => Ok(v),
        Form::One(x) => Ok(vec![x]),
        Form::Text(s) => s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| serde::de::Error::custom(format!("`{p}` is not a number"))))
            .collect(),
    }
}

/// Accepts `["a", "b"]` or one whitespace-separated string.
pub fn words<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Form {
        List(Vec<String>),
        Text(String),
    }
    Ok(match Form::deserialize(d)? {
        Form::List(v) => v,
        Form::Text(s) => s.split_whitespace().map(str::to_owned).collect(),
    })
}
