//! CSV and JSON artifact writers.
//!
//! CSV dialect: `#`-prefixed metadata lines, one comma-separated header row,
//! then data rows. Numbers are serialized with Rust's shortest round-trip
//! `Display` (decimal point, `inf`/`NaN` for non-finite values), so re-parsing
//! and re-emitting a file is byte-identical.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};

use crate::config::RunConfig;

pub struct Writer<'a> {
    dir: PathBuf,
    force: bool,
    config: &'a RunConfig,
    command: &'a str,
    pub written: Vec<PathBuf>,
}

impl<'a> Writer<'a> {
    pub fn new(config: &'a RunConfig, command: &'a str, force: bool) -> Result<Self> {
        let dir = PathBuf::from(&config.output.dir);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir, force, config, command, written: Vec::new() })
    }

    fn target(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if path.exists() && !self.force {
            bail!("{} exists; pass --force to overwrite", path.display());
        }
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes a CSV table with metadata comment lines above the header.
    pub fn csv(&mut self, name: &str, metadata: &[(&str, String)], header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let path = self.target(name)?;
        let mut text = String::new();
        for (k, v) in metadata {
            let _ = writeln!(text, "# {k} = {v}");
        }
        let _ = writeln!(text, "{}", header.join(","));
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
            let _ = writeln!(text, "{}", cells.join(","));
        }
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// Writes a JSON sidecar carrying the config echo, version, and grid
    /// provenance alongside command-specific payload fields.
    pub fn json(&mut self, name: &str, payload: serde_json::Value) -> Result<()> {
        let path = self.target(name)?;
        let doc = serde_json::json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "result": payload,
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Shortest round-trip decimal; non-finite values render as `inf` / `NaN`.
pub fn format_float(v: f64) -> String {
    format!("{v}")
}

/// Parses a CSV file written by [`Writer::csv`] back into metadata, header,
/// and rows. Re-emitting through the same writer is byte-identical; the
/// round-trip property is exercised in the tests.
#[cfg_attr(not(test), allow(dead_code))]
pub fn parse_csv(text: &str) -> Result<(Vec<(String, String)>, Vec<String>, Vec<Vec<f64>>)> {
    let mut metadata = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest.split_once('=').unwrap_or((rest, ""));
            metadata.push((k.trim().to_string(), v.trim().to_string()));
        } else if header.is_none() {
            header = Some(line.split(',').map(str::to_string).collect());
        } else {
            let row: Result<Vec<f64>> = line
                .split(',')
                .map(|c| c.parse::<f64>().with_context(|| format!("bad cell {c:?}")))
                .collect();
            rows.push(row?);
        }
    }
    Ok((metadata, header.context("missing header")?, rows))
}
