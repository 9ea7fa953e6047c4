//! Output directory: CSV tables, JSON summaries and the `run.json` manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const MANIFEST: &str = "run.json";

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the config file bytes.
    pub config_hash: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub files: Vec<String>,
}

/// Writes every file of one run and remembers its name for the manifest.
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn claim(&mut self, name: &str) -> Result<PathBuf, CliError> {
        if name == MANIFEST || self.files.iter().any(|f| f == name) {
            return Err(CliError::Other(anyhow::anyhow!(
                "output file {name} written twice"
            )));
        }
        self.files.push(name.to_string());
        Ok(self.dir.join(name))
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let path = self.claim(name)?;
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let path = self.claim(name)?;
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    pub fn finish(self, manifest: &RunManifest) -> Result<PathBuf, CliError> {
        let path = self.dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
