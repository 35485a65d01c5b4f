//! Deterministic CSV tables with JSON sidecars.
//!
//! Each `name.csv` gets a `name.meta.json` recording the run configuration,
//! the seed and the SHA-256 of the CSV bytes. Nothing time- or
//! host-dependent is written.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Marker written in place of an undefined value.
pub const NA: &str = "NA";

/// 12 significant digits, shortest form.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return NA.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    // -0 prints as "-0"
    if rounded == 0.0 {
        return "0".to_string();
    }
    format!("{rounded}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), fmt_num)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Serialize)]
struct Sidecar<'a> {
    file: &'a str,
    sha256: String,
    rows: usize,
    seed: u64,
    config: &'a RunConfig,
}

#[derive(Debug, Clone)]
pub struct OutputDir {
    dir: PathBuf,
    config: RunConfig,
}

impl OutputDir {
    pub fn create(config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(&config.out_dir).map_err(|e| CliError::io(&config.out_dir, e))?;
        Ok(Self {
            dir: config.out_dir.clone(),
            config: config.clone(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Writes `<stem>.csv` and its sidecar, returning the CSV path.
    pub fn write_table(
        &self,
        stem: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<PathBuf> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::io(&self.dir, e.into_error()))?;

        let name = format!("{stem}.csv");
        let path = self.dir.join(&name);
        fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;

        let meta = Sidecar {
            file: &name,
            sha256: sha256_hex(&bytes),
            rows: rows.len(),
            seed: self.config.seed,
            config: &self.config,
        };
        let mut json = serde_json::to_vec_pretty(&meta)?;
        json.push(b'\n');
        let meta_path = self.dir.join(format!("{stem}.meta.json"));
        fs::write(&meta_path, json).map_err(|e| CliError::io(&meta_path, e))?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

/// Left-aligned first column, right-aligned rest.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let ncol = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            if i == 0 {
                s.push_str(&format!("{c:<w$}", w = width[i]));
            } else {
                s.push_str(&format!("{c:>w$}", w = width[i]));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(rule.iter().map(String::as_str).collect()));
    for r in rows {
        out.push_str(&line(r.iter().take(ncol).map(String::as_str).collect()));
    }
    out
}
