//! Deterministic CSV output and the run manifest.
//!
//! Every CSV starts with one comment line naming its schema and version,
//! then a header row. Floats are written as `{:.16e}`, which round-trips
//! every `f64`.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn num(x: f64) -> String {
    // fold -0 into 0 so signs of exact zeros never differ between runs
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

pub struct CsvOut {
    writer: csv::Writer<File>,
    width: usize,
    pub path: PathBuf,
}

impl CsvOut {
    pub fn create(dir: &Path, file: &str, schema: &str, columns: &[String]) -> Result<Self, CliError> {
        let path = dir.join(file);
        let mut f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        writeln!(f, "# mesoleads {schema} v{SCHEMA_VERSION}").map_err(|e| CliError::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(f);
        writer.write_record(columns).map_err(|e| CliError::io(&path, e))?;
        Ok(Self {
            writer,
            width: columns.len(),
            path,
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        let rec = csv::ByteRecord::from_iter(fields);
        debug_assert_eq!(rec.len(), self.width, "row width mismatch in {}", self.path.display());
        self.writer.write_byte_record(&rec).map_err(|e| CliError::io(&self.path, e))
    }

    pub fn numbers(&mut self, values: &[f64]) -> Result<(), CliError> {
        self.row(values.iter().map(|&x| num(x)))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// Resolved parameters, diagnostics and produced files of one run. The
/// timestamp is the only field that differs between identical runs.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub created_unix: u64,
    pub seedless: bool,
    pub workers: usize,
    pub config: Value,
    pub diagnostics: Value,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config_path: Option<&Path>, seedless: bool, workers: usize) -> Self {
        Self {
            tool: "mesoleads",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config_path: config_path.map(Path::to_path_buf),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            seedless,
            workers,
            config: Value::Null,
            diagnostics: Value::Null,
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn add_output(&mut self, path: &Path) {
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        self.outputs.push(name);
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest is plain data");
        std::fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))
    }
}
