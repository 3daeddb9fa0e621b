//! Experiment documents and artifact output.
//!
//! An experiment is a TOML document:
//!
//! ```toml
//! seed = 7
//! output = "out/damped"
//!
//! [domain]
//! bounding_box = [[-8.0, 8.0]]
//! spacing = [0.0625]
//! region = { shape = "box" }
//!
//! [datum]
//! profile = "gaussian"
//! center = [0.0]
//! width = 1.0
//! amplitude = 1.0
//!
//! [scheme]
//! scheme = "damped_truncated"
//! family = { kind = "damping", alpha = 0.5 }
//! m = 16.0
//! dt = 0.001
//! t_final = 2.0
//!
//! [sweep]
//! ms = [4.0, 8.0, 16.0, 32.0, 64.0]
//! ```
//!
//! Every data artifact carries the SHA-256 digest of the canonical
//! re-serialization of the effective document (after command-line overrides).
//! Timestamps are written only to the `meta.json` sidecar.

pub mod commands;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::convergence::ConvergenceError;
use crate::evolution::{EvolutionError, SchemeConfig};
use crate::fields::Datum;
use crate::grid::io::SnapshotError;
use crate::grid::{build_grid, DomainSpec, Grid, GridError};
use crate::resolvent::ResolventError;

pub use commands::{cmd_cauchy, cmd_report, cmd_run, cmd_verify};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    ConfigParse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Convergence(#[from] ConvergenceError),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("checks failed: {0}")]
    Failed(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    /// Every node of the box.
    #[default]
    Box,
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    /// Domain document on disk; `bounding_box` and `spacing` are ignored.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default)]
    pub bounding_box: Vec<[f64; 2]>,
    #[serde(default)]
    pub spacing: Vec<f64>,
    #[serde(default)]
    pub region: Region,
}

fn radius(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(a, xa)| (xa - c.get(a).copied().unwrap_or(0.0)).powi(2))
        .sum::<f64>()
        .sqrt()
}

impl DomainConfig {
    pub fn spec(&self) -> Result<DomainSpec, ExperimentError> {
        if let Region::File { path } = &self.region {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ExperimentError::ConfigRead { path: path.clone(), source })?;
            return Ok(DomainSpec::from_document(&text)?);
        }
        let spec = DomainSpec::full_box(self.bounding_box.clone(), self.spacing.clone())?;
        Ok(match &self.region {
            Region::Box | Region::File { .. } => spec,
            Region::Ball { center, radius: r } => spec.restrict(|x| radius(x, center) < *r),
            Region::Annulus { center, inner, outer } => spec.restrict(|x| {
                let r = radius(x, center);
                r > *inner && r < *outer
            }),
        })
    }

    pub fn grid(&self) -> Result<Grid, ExperimentError> {
        Ok(build_grid(&self.spec()?)?)
    }

    /// Same region with every spacing halved.
    pub fn refined(&self) -> Self {
        DomainConfig { spacing: self.spacing.iter().map(|h| h / 2.0).collect(), ..self.clone() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Truncation levels of a family run.
    #[serde(default)]
    pub ms: Vec<f64>,
    /// Localization radii.
    #[serde(default)]
    pub radii: Vec<f64>,
    /// Exponents of the `L^{2p′}` probe on the two largest members.
    #[serde(default)]
    pub ps: Vec<f64>,
    /// Perturbation scales of the dependence probe.
    #[serde(default)]
    pub scales: Vec<f64>,
    /// Perturbation direction, normalized to unit `H¹` norm.
    #[serde(default)]
    pub perturbation: Option<Datum>,
    /// Repeat the family with halved spacing and compare bound violations.
    #[serde(default)]
    pub refine: bool,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub domain: DomainConfig,
    pub datum: Datum,
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ExperimentError::ConfigRead { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Canonical TOML form; the digest is taken over these bytes.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

/// Write `path` through a temporary file in the same directory, renamed on success.
pub fn write_atomic(path: &Path, contents: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), ExperimentError> {
    let io = |source| ExperimentError::Io { path: path.to_path_buf(), source };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut w = std::io::BufWriter::new(tmp.as_file_mut());
        contents(&mut w).map_err(io)?;
        w.flush().map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline; key order follows field order.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

fn csv_error(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

/// Write a CSV artifact from a writer callback returning `csv::Result`.
pub fn write_csv(path: &Path, f: impl FnOnce(&mut dyn Write) -> csv::Result<()>) -> Result<(), ExperimentError> {
    write_atomic(path, |w| f(w).map_err(csv_error))
}

#[derive(Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    config_digest: &'a str,
    started_unix: f64,
    finished_unix: f64,
}

pub fn now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Sidecar with wall-clock data, kept apart from the reproducible artifacts.
pub fn write_meta(dir: &Path, command: &str, digest: &str, started: f64) -> Result<(), ExperimentError> {
    let meta = Meta {
        command,
        version: env!("CARGO_PKG_VERSION"),
        config_digest: digest,
        started_unix: started,
        finished_unix: now(),
    };
    write_json(&dir.join("meta.json"), &meta)
}
