//! CSV and manifest emission.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::AppError;

/// Round-trip exact float formatting (17 significant digits).
pub fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub struct CsvOut {
    path: PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: PathBuf, header: &[&str]) -> Result<Self, AppError> {
        let file = File::create(&path).map_err(|e| AppError::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(BufWriter::new(file));
        writer.write_record(header).map_err(|e| AppError::Runtime(e.to_string()))?;
        Ok(Self { path, writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), AppError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| AppError::Runtime(e.to_string()))
    }

    pub fn floats(&mut self, values: &[f64]) -> Result<(), AppError> {
        self.row(values.iter().map(|&v| float(v)))
    }

    pub fn finish(mut self) -> Result<PathBuf, AppError> {
        self.writer.flush().map_err(|e| AppError::io(&self.path, e))?;
        Ok(self.path)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip)]
    boolean: bool,
}

impl Check {
    /// Passes when `observed <= limit` (NaN fails).
    pub fn at_most(name: impl Into<String>, observed: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: observed <= limit, observed, limit, detail: None, boolean: false }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            observed: if passed { 0.0 } else { 1.0 },
            limit: 0.0,
            detail: Some(detail.into()),
            boolean: true,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// Provenance record written next to every run's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub preset: Option<String>,
    pub config: Value,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    pub checks: Vec<Check>,
    pub metrics: Map<String, Value>,
    pub outputs: Vec<String>,
    pub passed: bool,
}

pub struct Recorder {
    subcommand: String,
    preset: Option<String>,
    config: Value,
    dir: PathBuf,
    started: Instant,
    started_unix: u64,
    pub checks: Vec<Check>,
    pub metrics: Map<String, Value>,
    outputs: Vec<String>,
}

impl Recorder {
    pub fn new(subcommand: &str, preset: Option<String>, config: Value, dir: PathBuf) -> Self {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            subcommand: subcommand.into(),
            preset,
            config,
            dir,
            started: Instant::now(),
            started_unix,
            checks: vec![],
            metrics: Map::new(),
            outputs: vec![],
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str]) -> Result<CsvOut, AppError> {
        CsvOut::create(self.path(name), header)
    }

    pub fn output(&mut self, path: &Path) {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.outputs.push(name);
    }

    pub fn check(&mut self, check: Check) {
        let status = if check.passed { "PASS" } else { "FAIL" };
        match &check.detail {
            Some(d) if check.boolean => println!("{status} {}: {d}", check.name),
            Some(d) => println!("{status} {}: observed {:e}, limit {:e} ({d})", check.name, check.observed, check.limit),
            None => println!("{status} {}: observed {:e}, limit {:e}", check.name, check.observed, check.limit),
        }
        self.checks.push(check);
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        self.metrics.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Writes `<subcommand>.manifest.json` and returns whether every check passed.
    pub fn finish(self, threads: usize) -> Result<bool, AppError> {
        let passed = self.passed();
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand.clone(),
            preset: self.preset,
            config: self.config,
            threads,
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            checks: self.checks,
            metrics: self.metrics,
            outputs: self.outputs,
            passed,
        };
        let path = self.dir.join(format!("{}.manifest.json", self.subcommand));
        let file = File::create(&path).map_err(|e| AppError::io(&path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(file), &manifest).map_err(|e| AppError::Runtime(e.to_string()))?;
        Ok(passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [1.0 / 3.0, -2.5e-300, 123456.789, 0.0, f64::MIN_POSITIVE] {
            let s = float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(0.1), "1.0000000000000001e-1");
    }

    #[test]
    fn check_nan_fails() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(Check::at_most("x", 1.0, 1.0).passed);
    }
}
