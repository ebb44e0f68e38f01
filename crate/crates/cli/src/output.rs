//! Output files, CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Where a command writes. A path with a file extension names the primary
/// output and secondary outputs are placed next to it; anything else is a
/// directory receiving files under their default names.
pub struct Outputs {
    base: PathBuf,
    is_file: bool,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(out: &Path) -> Self {
        let is_file = out.extension().is_some_and(|e| ["json", "csv", "txt"].iter().any(|x| e == *x));
        Outputs { base: out.to_path_buf(), is_file, written: Vec::new() }
    }

    /// Path of the main output; `default_name` is used in directory mode.
    pub fn primary(&self, default_name: &str) -> PathBuf {
        if self.is_file {
            self.base.clone()
        } else {
            self.base.join(default_name)
        }
    }

    /// Path of an additional output: `<stem>.<suffix>` next to the primary file, or `<suffix>` in the directory.
    pub fn secondary(&self, suffix: &str) -> PathBuf {
        if self.is_file {
            let stem = self.base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            self.base.with_file_name(format!("{stem}.{suffix}"))
        } else {
            self.base.join(suffix)
        }
    }

    /// The directory itself (directory mode only makes sense for bundles).
    pub fn directory(&self) -> PathBuf {
        if self.is_file {
            self.base.with_extension("")
        } else {
            self.base.clone()
        }
    }

    fn prepare(path: &Path) -> CliResult<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        Ok(())
    }

    pub fn record(&mut self, path: PathBuf) {
        if !self.written.contains(&path) {
            self.written.push(path);
        }
    }

    pub fn write_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> CliResult<()> {
        Self::prepare(&path)?;
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        self.record(path);
        Ok(())
    }

    pub fn write_table(&mut self, path: PathBuf, table: &Table) -> CliResult<()> {
        Self::prepare(&path)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&table.header)?;
        w.write_record(&table.units)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.record(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn manifest_path(&self) -> PathBuf {
        if self.is_file {
            self.secondary("manifest.json")
        } else {
            self.base.join("manifest.json")
        }
    }
}

/// A self-describing table: header row, units row, data rows.
pub struct Table {
    header: Vec<String>,
    units: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Table {
            header: columns.iter().map(|c| c.0.to_string()).collect(),
            units: columns.iter().map(|c| c.1.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal form, so equal values print identically.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digest of a file, or of the sorted files of a directory.
pub fn sha256_path(path: &Path) -> CliResult<String> {
    if !path.is_dir() {
        return sha256_file(path);
    }
    let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_name().is_some_and(|n| n != "manifest.json"))
        .collect();
    entries.sort();
    let mut h = Sha256::new();
    for p in entries {
        h.update(p.file_name().unwrap_or_default().to_string_lossy().as_bytes());
        h.update(sha256_file(&p)?.as_bytes());
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command_line: Vec<String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_digest: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<OutputEntry>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(seed: u64, threads: Option<usize>) -> Self {
        RunManifest {
            tool: "stripflow",
            tool_version: env!("CARGO_PKG_VERSION"),
            command_line: std::env::args().collect(),
            seed,
            threads,
            config_digest: None,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.insert(path.display().to_string(), sha256_path(path)?);
        Ok(())
    }

    pub fn finish(&mut self, outputs: &Outputs, seconds: f64) -> CliResult<()> {
        self.outputs = outputs
            .written()
            .iter()
            .map(|p| Ok(OutputEntry { path: p.display().to_string(), sha256: sha256_path(p)? }))
            .collect::<CliResult<_>>()?;
        self.wall_clock_seconds = seconds;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_directory_modes() {
        let f = Outputs::new(Path::new("run/kernel.csv"));
        assert_eq!(f.primary("x.csv"), PathBuf::from("run/kernel.csv"));
        assert_eq!(f.secondary("target.json"), PathBuf::from("run/kernel.target.json"));
        assert_eq!(f.manifest_path(), PathBuf::from("run/kernel.manifest.json"));
        let d = Outputs::new(Path::new("disc"));
        assert_eq!(d.primary("x.csv"), PathBuf::from("disc/x.csv"));
        assert_eq!(d.manifest_path(), PathBuf::from("disc/manifest.json"));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e10] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn table_has_units_row() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = Outputs::new(dir.path());
        let mut t = Table::new(&[("k", "index"), ("v", "length")]);
        t.push(vec!["0".into(), num(0.5)]);
        let path = out.primary("t.csv");
        out.write_table(path.clone(), &t).unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "k,v\nindex,length\n0,0.5\n");
    }
}
