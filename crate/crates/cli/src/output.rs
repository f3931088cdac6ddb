//! CSV and script files with the resolved configuration as a comment header.

use std::fs;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Output directory for one preset run.
pub struct OutputDir {
    dir: PathBuf,
    header: String,
    written: Vec<PathBuf>,
}

impl OutputDir {
    /// `timestamp` is `None` for reproducible (byte-identical) output.
    pub fn create(
        dir: &Path,
        preset: &str,
        seed: u64,
        config_toml: &str,
        timestamp: Option<String>,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let mut header = format!("# preset: {preset}\n");
        if let Some(t) = timestamp {
            header.push_str(&format!("# generated: {t}\n"));
        }
        header.push_str(&format!("# seed: {seed}\n# config:\n"));
        for line in config_toml.lines() {
            if line.is_empty() {
                header.push_str("#\n");
            } else {
                header.push_str(&format!("#   {line}\n"));
            }
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
            written: Vec::new(),
        })
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, name: &str, body: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut bytes = self.header.clone().into_bytes();
        bytes.extend_from_slice(body);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Write a CSV with column names `columns`.
    pub fn csv<I>(&mut self, name: &str, columns: &[&str], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(format!("{name}: {e}"));
        w.write_record(columns).map_err(io)?;
        for r in rows {
            debug_assert_eq!(r.len(), columns.len());
            w.write_record(&r).map_err(io)?;
        }
        let body = w
            .into_inner()
            .map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        self.write(name, &body)
    }

    /// Plot scripts carry the same header (it is a Python comment).
    pub fn script(&mut self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        self.write(name, body.as_bytes())
    }
}

/// Shortest round-trip text for a float; empty for `None`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
