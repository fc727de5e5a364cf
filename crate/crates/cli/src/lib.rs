//! Command-line front end: verification suites, integrations and
//! aggregate reports over the built-in examples.

use std::path::Path;

use kslie::expr::{ExprError, ZeroTest, DEFAULT_TOL, DEFAULT_TRIALS};
use kslie::registry::{self, ExampleRecord, RecordJson, RegistryError};
use serde::{Deserialize, Serialize};

pub mod args;
pub mod integrate;
pub mod report;
pub mod text;
pub mod verify;

pub use args::run;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Registry(RegistryError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{0}")]
    Runtime(String),
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::UnknownExample(id) => CliError::UnknownExample(id),
            RegistryError::UnknownParameter(p) => CliError::Usage(format!("unknown parameter `{p}`")),
            other => CliError::Registry(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownExample(_) | CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub const DEFAULT_SEED: u64 = 1;

/// Zero-test parameters shared by every suite of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            tol: DEFAULT_TOL,
        }
    }
}

impl Settings {
    /// A tester for one named stream, so a suite draws the same points
    /// whether it runs alone or inside `all`.
    pub fn zero_test(&self, stream: &str) -> Result<ZeroTest> {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in stream.bytes() {
            h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
        }
        Ok(ZeroTest::with_settings(self.seed ^ h, self.trials, self.tol)?)
    }
}

/// Built-in records plus any loaded with `--load`.
#[derive(Debug, Clone, Default)]
pub struct Library {
    loaded: Vec<ExampleRecord>,
}

impl Library {
    pub fn new() -> Self {
        Library::default()
    }

    /// Reads one record or an array of records.
    pub fn load(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let json = |source| CliError::Json {
            path: path.display().to_string(),
            source,
        };
        let value: serde_json::Value = serde_json::from_str(&text).map_err(json)?;
        let records: Vec<RecordJson> = if value.is_array() {
            serde_json::from_value(value).map_err(json)?
        } else {
            vec![serde_json::from_value(value).map_err(json)?]
        };
        for r in records {
            let rec = ExampleRecord::from_json(r)?;
            self.loaded.retain(|l| l.id() != rec.id());
            self.loaded.push(rec);
        }
        Ok(())
    }

    pub fn add(&mut self, rec: ExampleRecord) {
        self.loaded.retain(|l| l.id() != rec.id());
        self.loaded.push(rec);
    }

    /// Loaded records shadow built-in ones with the same id.
    pub fn get(&self, id: &str) -> Result<ExampleRecord> {
        if let Some(r) = self.loaded.iter().find(|r| r.id() == id) {
            return Ok(r.clone());
        }
        Ok(registry::example(id)?)
    }

    /// Registry order, then loaded records in load order.
    pub fn ids(&self) -> Vec<String> {
        let mut out: Vec<String> = registry::IDS.iter().map(|s| s.to_string()).collect();
        for r in &self.loaded {
            if !out.iter().any(|i| i == r.id()) {
                out.push(r.id().to_string());
            }
        }
        out
    }
}
