//! Run manifests.
//!
//! A run with `--out PREFIX` writes its files as `PREFIX.<name>` and finishes
//! with `PREFIX.manifest.json`, which records the configuration, the resolved
//! parameters, the seed, the tolerances in force and a SHA-256 digest of
//! every output. Only reproducible data goes into the manifest. The
//! wall-clock time goes to `PREFIX.timing.txt`, so two runs with the same
//! inputs give byte-identical CSV and JSON files, the manifest included.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ConfigFile;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Gap below which a single matrix counts as non-proximal.
    pub tol_gap: f64,
    /// Gap threshold of the proximality scans.
    pub scan_gap_threshold: f64,
    /// Discretisation error of `dd^c` from the Lelong calibration.
    pub eps_disc: Option<f64>,
    /// Support threshold of the current, when one was computed.
    pub noise_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Option<ConfigFile>,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
    pub tolerances: Tolerances,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `PREFIX.<name>` files and remembers their digests.
pub struct OutputSet {
    prefix: PathBuf,
    outputs: Vec<OutputDigest>,
}

impl OutputSet {
    pub fn new(prefix: &Path) -> Result<Self, CliError> {
        if prefix.file_name().is_none() {
            return Err(CliError::Usage(format!("output prefix `{}` has no file name", prefix.display())));
        }
        if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
                path: dir.to_path_buf(),
                source,
            })?;
        }
        Ok(OutputSet {
            prefix: prefix.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        let mut p = self.prefix.clone().into_os_string();
        p.push(".");
        p.push(name);
        PathBuf::from(p)
    }

    fn write_raw(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    /// Writes a digested output and returns its path.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.write_raw(name, bytes)?;
        let file = path.file_name().expect("prefix has a file name").to_string_lossy().into_owned();
        self.outputs.push(OutputDigest {
            file,
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        self.write(name, to_json(value).as_bytes())
    }

    /// Writes the manifest (listing every output so far) and the timing file.
    pub fn finish(self, mut manifest: RunManifest, elapsed: Duration) -> Result<PathBuf, CliError> {
        manifest.outputs = self.outputs.clone();
        let path = self.write_raw("manifest.json", to_json(&manifest).as_bytes())?;
        self.write_raw("timing.txt", format!("wall_clock_seconds {:.3}\n", elapsed.as_secs_f64()).as_bytes())?;
        Ok(path)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn outputs_are_listed_in_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::new(&dir.path().join("sub").join("run")).unwrap();
        out.write("a.csv", b"x\n").unwrap();
        let manifest = RunManifest {
            tool: "bifurclab".into(),
            version: "0".into(),
            command: "test".into(),
            config: None,
            seed: Some(1),
            parameters: serde_json::json!({}),
            tolerances: Tolerances {
                tol_gap: 1e-9,
                scan_gap_threshold: 1e-4,
                eps_disc: None,
                noise_floor: None,
            },
            outputs: Vec::new(),
        };
        let path = out.finish(manifest, Duration::from_millis(5)).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.contains("\"file\": \"run.a.csv\""));
        assert!(dir.path().join("sub/run.timing.txt").exists());
    }
}
