//! Layered configuration: defaults < preset < config file < flags.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use crate::AppError;

pub const OUTPUT_DIR_ENV: &str = "GHOSTBOUND_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "ghostbound-out";

/// Top-level keys a config file may carry besides per-subcommand tables.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub preset: Option<String>,
    pub section: Table,
}

impl FileConfig {
    /// Reads a TOML file. Keys for the running subcommand may sit at top level
    /// or inside a `[<subcommand>]` table; tables for other subcommands are
    /// ignored.
    pub fn load(path: &Path, subcommand: &str) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))?;
        let mut table: Table =
            text.parse().map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))?;
        let mut out = FileConfig::default();
        if let Some(v) = table.remove("output_dir") {
            out.output_dir = Some(PathBuf::from(expect_str("output_dir", v)?));
        }
        if let Some(v) = table.remove("threads") {
            let n = v.as_integer().filter(|n| *n >= 1).ok_or_else(|| AppError::Usage("threads must be a positive integer".into()))?;
            out.threads = Some(n as usize);
        }
        if let Some(v) = table.remove("preset") {
            out.preset = Some(expect_str("preset", v)?);
        }
        let section = match table.remove(subcommand) {
            Some(Value::Table(t)) => t,
            Some(_) => return Err(AppError::Usage(format!("[{subcommand}] must be a table"))),
            None => Table::new(),
        };
        for name in crate::SUBCOMMANDS {
            table.remove(*name);
        }
        out.section = section;
        for (k, v) in table {
            out.section.insert(k, v);
        }
        Ok(out)
    }
}

fn expect_str(key: &str, v: Value) -> Result<String, AppError> {
    match v {
        Value::String(s) => Ok(s),
        other => Err(AppError::Usage(format!("{key} must be a string, got {other}"))),
    }
}

fn to_table<S: Serialize>(value: &S) -> Result<Table, AppError> {
    Table::try_from(value).map_err(|e| AppError::Runtime(format!("cannot serialize parameters: {e}")))
}

/// Overlays `file` and then `flags` onto `base`. Every key must already
/// exist in `base`, so parameter structs serialize all their fields.
pub fn resolve<P, F>(base: &P, file: &Table, flags: &F) -> Result<P, AppError>
where
    P: Serialize + DeserializeOwned,
    F: Serialize,
{
    let mut merged = to_table(base)?;
    let unknown: Vec<&str> = file.keys().filter(|k| !merged.contains_key(*k)).map(String::as_str).collect();
    if !unknown.is_empty() {
        return Err(AppError::Usage(format!("unknown configuration key(s): {}", unknown.join(", "))));
    }
    for (k, v) in file {
        merged.insert(k.clone(), v.clone());
    }
    for (k, v) in to_table(flags)? {
        merged.insert(k, v);
    }
    Value::Table(merged).try_into().map_err(|e: toml::de::Error| AppError::Usage(format!("invalid configuration: {}", e.message())))
}

/// Flag, then config file, then environment, then the built-in default.
pub fn output_dir(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    flag.or(file)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct P {
        a: f64,
        b: usize,
        c: String,
    }

    #[derive(Serialize)]
    struct F {
        #[serde(skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        b: Option<usize>,
    }

    #[test]
    fn flags_beat_file_beat_defaults() {
        let base = P { a: 1.0, b: 2, c: "x".into() };
        let file: Table = "a = 5.0\nc = \"y\"".parse().unwrap();
        let flags = F { a: Some(9.0), b: None };
        let p = resolve(&base, &file, &flags).unwrap();
        assert_eq!(p, P { a: 9.0, b: 2, c: "y".into() });
    }

    #[test]
    fn unknown_key_is_usage_error() {
        let base = P { a: 1.0, b: 2, c: "x".into() };
        let file: Table = "zzz = 1".parse().unwrap();
        let err = resolve(&base, &file, &F { a: None, b: None }).unwrap_err();
        assert!(matches!(err, AppError::Usage(_)));
    }

    #[test]
    fn wrong_type_is_usage_error() {
        let base = P { a: 1.0, b: 2, c: "x".into() };
        let file: Table = "b = \"many\"".parse().unwrap();
        assert!(matches!(resolve(&base, &file, &F { a: None, b: None }), Err(AppError::Usage(_))));
    }
}
