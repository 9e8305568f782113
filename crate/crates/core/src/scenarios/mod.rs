//! Canned end-to-end experiments writing CSV/JSON artifacts and a manifest.
//!
//! Each run writes its data files plus `summary.json` (resolved parameters and
//! headline numbers) into the output directory, then `manifest.json` listing
//! every artifact with its SHA-256. Outputs are deterministic for a given
//! config. If any step fails, the files written so far are removed.

mod config;
mod runs;

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use config::{CircuitSection, Resolved, ScenarioConfig, ScenarioId, SCHEMA_VERSION};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub scenario: ScenarioId,
    pub files: Vec<ManifestEntry>,
    /// Headline numbers, also stored in `summary.json`.
    pub headline: serde_json::Value,
}

/// Tracks the files of one run so a failure can remove them.
pub(crate) struct Output {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<(PathBuf, ManifestEntry)>,
}

impl Output {
    fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        std::fs::create_dir_all(dir).map_err(|e| {
            Error::Config(format!(
                "cannot create output directory {}: {e}",
                dir.display()
            ))
        })?;
        Ok(Output {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
        })
    }

    pub(crate) fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)?;
        let entry = ManifestEntry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        };
        self.files.push((path, entry));
        Ok(())
    }

    pub(crate) fn csv(
        &mut self,
        name: &str,
        fill: impl FnOnce(&mut Vec<u8>) -> Result<()>,
    ) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    pub(crate) fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut buf = serde_json::to_vec_pretty(value)?;
        buf.push(b'\n');
        self.write(name, &buf)
    }

    fn discard(self) {
        for (path, _) in &self.files {
            let _ = std::fs::remove_file(path);
        }
        let _ = std::fs::remove_file(self.dir.join("manifest.json"));
        if self.created_dir {
            let _ = std::fs::remove_dir(&self.dir);
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    scenario: ScenarioId,
    params: &'a Resolved,
    headline: &'a serde_json::Value,
}

/// Runs a scenario into `config.out_dir` (default `out/<id>`).
pub fn run_scenario(config: &ScenarioConfig) -> Result<Manifest> {
    let resolved = config.resolve()?;
    let dir = config
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(config.id.name()));
    run_resolved(&resolved, &dir)
}

/// Runs fully resolved parameters into `dir`.
pub fn run_resolved(params: &Resolved, dir: &Path) -> Result<Manifest> {
    let mut out = Output::create(dir)?;
    match produce(params, &mut out) {
        Ok(manifest) => Ok(manifest),
        Err(e) => {
            out.discard();
            Err(e.context(format!("scenario {}", params.id)))
        }
    }
}

fn produce(params: &Resolved, out: &mut Output) -> Result<Manifest> {
    log::info!("running scenario {}", params.id);
    let headline = runs::run(params, out)?;
    out.json(
        "summary.json",
        &Summary {
            schema_version: SCHEMA_VERSION,
            scenario: params.id,
            params,
            headline: &headline,
        },
    )?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        scenario: params.id,
        files: out.files.iter().map(|(_, e)| e.clone()).collect(),
        headline,
    };
    let mut buf = serde_json::to_vec_pretty(&manifest)?;
    buf.push(b'\n');
    std::fs::write(out.dir.join("manifest.json"), buf)?;
    Ok(manifest)
}
