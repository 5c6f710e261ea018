//! Configuration, run manifests and artifact files.
//!
//! Every artifact is a pure function of the resolved configuration: no
//! timestamps, host names or thread counts are written, and floating-point
//! values use Rust's shortest round-trip formatting.

pub mod config;
pub mod svg;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{QrcError, Result};
use crate::quantum::Boundary;
use crate::seeding::RNG_ALGORITHM;

pub use config::{parse_config, parse_config_str, RawConfig, ResolvedConfig};

pub const OUT_DIR_ENV: &str = "QRC_OUT_DIR";
pub const DEFAULT_OUT_ROOT: &str = "qrc_out";
pub const MANIFEST_FILE: &str = "manifest.json";

/// `explicit` if given, else `$QRC_OUT_DIR/<experiment>`, else `qrc_out/<experiment>`.
pub fn output_dir(explicit: Option<&Path>, experiment: &str) -> PathBuf {
    match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let root = std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT), PathBuf::from);
            root.join(experiment)
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path).map_err(|e| QrcError::io(path, e))?))
}

/// Shortest round-trip text for a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// CSV text from a header and string rows.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| QrcError::invalid(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| QrcError::invalid(format!("csv encoding failed: {e}")))
}

/// Settings whose values are modelling choices rather than inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decisions {
    pub encoding: String,
    pub tau: f64,
    pub boundary: Boundary,
    pub layout: String,
    pub normalization: String,
    pub hidden_initial_state: String,
    pub scoring: String,
}

impl Decisions {
    pub fn from_config(cfg: &ResolvedConfig) -> Self {
        let angle = match cfg.encoding {
            crate::quantum::Encoding::Linear => "theta = pi x",
            crate::quantum::Encoding::Arccos => "theta = arccos(1 - 2x)",
        };
        let order = match cfg.input_order {
            crate::reservoir::InputOrder::Grouped => "grouped by variable",
            crate::reservoir::InputOrder::Interleaved => "interleaved variables",
        };
        let normalization = match cfg.map {
            crate::chaos::MapKind::Logistic => "divide by pooled training maximum",
            crate::chaos::MapKind::Henon => "per-variable min-max over pooled training series",
        };
        Decisions {
            encoding: format!("R_Y, {angle}"),
            tau: cfg.tau,
            boundary: cfg.boundary,
            layout: format!("inputs on sites 1..{}, {order}; hidden sites follow", cfg.map.dim() * cfg.n_rep),
            normalization: normalization.to_string(),
            hidden_initial_state: "|0...0>".to_string(),
            scoring: format!("{:?} predictions from index {}", cfg.eval_mode, cfg.eval_start),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub fields: u64,
    pub data: u64,
    pub lyapunov: u64,
    pub ensemble: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub tool_version: String,
    pub rng_algorithm: String,
    pub config: ResolvedConfig,
    pub seeds: Seeds,
    pub decisions: Decisions,
    /// Command arguments outside the configuration (e.g. a model path).
    pub arguments: BTreeMap<String, String>,
    /// sha256 of each input file.
    pub inputs: BTreeMap<String, String>,
    /// sha256 of each output file, keyed by name inside the output directory.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(experiment: &str, config: &ResolvedConfig) -> Self {
        RunManifest {
            experiment: experiment.to_string(),
            tool_version: format!("qrc {}", env!("CARGO_PKG_VERSION")),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            config: config.clone(),
            seeds: Seeds {
                fields: config.seed,
                data: config.data_seed,
                lyapunov: config.lle_seed,
                ensemble: config.ensemble_seed,
            },
            decisions: Decisions::from_config(config),
            arguments: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QrcError::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| QrcError::Config(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))?;
        m.config.validate()?;
        Ok(m)
    }

    /// Output files under `dir` whose hash differs from the recorded one.
    pub fn verify_outputs(&self, dir: &Path) -> Result<Vec<String>> {
        let mut bad = Vec::new();
        for (name, hash) in &self.outputs {
            let path = dir.join(name);
            match sha256_file(&path) {
                Ok(h) if &h == hash => {}
                _ => bad.push(name.clone()),
            }
        }
        Ok(bad)
    }
}

/// Writes artifacts into one directory and records their hashes.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    pub manifest: RunManifest,
}

impl ArtifactWriter {
    pub fn create(dir: PathBuf, manifest: RunManifest) -> Result<Self> {
        std::fs::create_dir_all(&dir).map_err(|e| QrcError::io(&dir, e))?;
        Ok(ArtifactWriter { dir, manifest })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| QrcError::io(&path, e))?;
        self.manifest.outputs.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
        let bytes = csv_bytes(header, rows)?;
        self.write(name, &bytes)
    }

    /// Write the manifest last; it is not listed among its own outputs.
    pub fn finish(self) -> Result<PathBuf> {
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.manifest.to_json()).map_err(|e| QrcError::io(&path, e))?;
        Ok(path)
    }
}
