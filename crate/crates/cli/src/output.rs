//! Deterministic output: CSV files (UTF-8, LF, header row, comma
//! separator, `.` decimal point, 17 significant digits) and the run
//! manifest with content digests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Full round-trip decimal representation (17 significant digits) so
/// downstream diffs are exact.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Builds one CSV from a header and row-formatting closure.
pub fn csv_table<Row>(
    header: &str,
    rows: &[Row],
    mut format_row: impl FnMut(&Row) -> String,
) -> String {
    let mut out = String::with_capacity(rows.len() * 64);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&format_row(row));
        out.push('\n');
    }
    out
}

/// A produced output file, tracked for the manifest.
#[derive(Debug, Clone)]
pub struct OutputFile {
    /// Name relative to the output directory.
    pub name: String,
    pub sha256: String,
}

/// Record of one command invocation: what ran, with which resolved inputs,
/// and the digests of what it produced. Re-running with the same inputs
/// reproduces identical output files.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    /// SHA-256 over the resolved spec block below.
    pub spec_digest: String,
    /// Flat `key = value` lines describing the resolved scenario.
    pub spec_lines: Vec<(String, String)>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, spec_lines: Vec<(String, String)>) -> Self {
        let mut spec_block = String::new();
        for (key, value) in &spec_lines {
            let _ = writeln!(spec_block, "{key} = {value}");
        }
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            spec_digest: hex::encode(Sha256::digest(spec_block.as_bytes())),
            spec_lines,
            outputs: Vec::new(),
        }
    }

    /// Writes `content` into `dir/name` and tracks its digest.
    pub fn write_output(&mut self, dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, content.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))?;
        self.outputs.push(OutputFile {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(content.as_bytes())),
        });
        Ok(path)
    }

    /// Serializes the manifest as flat key-value text.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {}", self.command);
        let _ = writeln!(out, "tool_version = {}", self.tool_version);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "spec_digest = {}", self.spec_digest);
        for (key, value) in &self.spec_lines {
            let _ = writeln!(out, "spec_{key} = {value}");
        }
        for file in &self.outputs {
            let _ = writeln!(out, "output = {} sha256={}", file.name, file.sha256);
        }
        out
    }

    /// Writes `dir/manifest.txt`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.txt");
        fs::write(&path, self.render())
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}
