use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::verify::{run_suite, Suite, SuiteReport};
use super::{now, write_csv, write_json, write_meta, ExperimentConfig, ExperimentError};
use crate::convergence::{
    dependence_probe, refinement_check, run_family, yudovich_probe, ConvergenceError, ConvergenceReport,
    DependenceReport, RefinementCheck, YudovichReport,
};
use crate::evolution::{evolve, Diagnostics, EvolutionError, TrajectoryRecord};
use crate::grid::io::{write_snapshot, SNAPSHOT_MAGIC};
use crate::grid::Grid;

/// Threshold on `‖u‖_∞` defining extinction.
pub const EXTINCTION_THRESHOLD: f64 = 1e-12;

#[derive(Serialize)]
struct Stamped<'a, T> {
    config_digest: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn stamped_json<T: Serialize>(path: &Path, digest: &str, body: &T) -> Result<(), ExperimentError> {
    write_json(path, &Stamped { config_digest: digest, body })
}

fn verify_digest(suite: Suite, samples: usize, seed: u64) -> String {
    let doc = format!("suite = \"{suite}\"\nsamples = {samples}\nseed = {seed}\n");
    hex::encode(Sha256::digest(doc.as_bytes()))
}

/// Run a property suite; the report is also written to `out/verify_<suite>.json`.
pub fn cmd_verify(suite: Suite, samples: usize, seed: u64, out: Option<&Path>) -> Result<SuiteReport, ExperimentError> {
    let started = now();
    let report = run_suite(suite, seed, samples)?;
    if let Some(dir) = out {
        let digest = verify_digest(suite, samples, seed);
        stamped_json(&dir.join(format!("verify_{suite}.json")), &digest, &report)?;
        write_meta(dir, "verify", &digest, started)?;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub status: String,
    pub steps: usize,
    pub completed: usize,
    pub dt: f64,
    pub final_diagnostics: Option<Diagnostics>,
    pub relative_mass_drift: f64,
    pub energy_drift: f64,
    pub extinction_time: Option<f64>,
    pub max_substeps: usize,
    pub snapshots: Vec<String>,
}

fn summarize(record: &TrajectoryRecord, status: String, dissipative: bool, snapshots: Vec<String>) -> RunSummary {
    let has = !record.diagnostics.is_empty();
    RunSummary {
        status,
        steps: record.steps,
        completed: record.completed,
        dt: record.dt,
        final_diagnostics: record.diagnostics.last().copied(),
        relative_mass_drift: if has { record.relative_mass_drift() } else { 0.0 },
        energy_drift: if has { record.energy_drift() } else { 0.0 },
        extinction_time: if dissipative { record.extinction_time(EXTINCTION_THRESHOLD) } else { None },
        max_substeps: record.max_substeps,
        snapshots,
    }
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> Result<(), ExperimentError> {
    let text = cfg.canonical();
    super::write_atomic(&dir.join("config.toml"), |w| w.write_all(text.as_bytes()))
}

fn write_record(dir: &Path, grid: &Grid, record: &TrajectoryRecord, digest: &str) -> Result<Vec<String>, ExperimentError> {
    write_csv(&dir.join("diagnostics.csv"), |w| record.write_csv(w, digest))?;
    let mut names = Vec::new();
    for s in &record.snapshots {
        let name = format!("snapshots/step_{:08}.bin", s.step);
        super::write_atomic(&dir.join(&name), |w| write_snapshot(w, grid, &s.field))?;
        names.push(name);
    }
    Ok(names)
}

/// Single evolution; writes `config.toml`, `diagnostics.csv`, snapshots and `summary.json`.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary, ExperimentError> {
    let started = now();
    let digest = cfg.digest();
    let grid = cfg.domain.grid()?;
    let phi = cfg.datum.sample(&grid)?;
    write_config(out, cfg)?;
    let dissipative = cfg.scheme.family.is_dissipative();
    let result = evolve(&grid, &cfg.scheme, &phi);
    let (record, status, failure) = match result {
        Ok(r) => (r, "completed".to_string(), None),
        Err(EvolutionError::NonFinite { step, time, partial }) => {
            let msg = format!("aborted: non-finite field at step {step} (t = {time})");
            (*partial, msg.clone(), Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    let snapshots = write_record(out, &grid, &record, &digest)?;
    let summary = summarize(&record, status, dissipative, snapshots);
    stamped_json(&out.join("summary.json"), &digest, &summary)?;
    write_meta(out, "run", &digest, started)?;
    match failure {
        Some(msg) => Err(ExperimentError::Failed(msg)),
        None => Ok(summary),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchySummary {
    pub status: String,
    pub pass: bool,
    pub completed_levels: Vec<f64>,
    pub report: Option<ConvergenceReport>,
    /// Localized distances never decrease as the radius grows.
    pub localized_monotone: Option<bool>,
    pub refinement: Option<RefinementCheck>,
    pub yudovich: Option<YudovichReport>,
    pub dependence: Option<DependenceReport>,
}

fn localized_monotone(report: &ConvergenceReport) -> Option<bool> {
    if report.localized.len() < 2 {
        return None;
    }
    let mut sorted: Vec<_> = report.localized.iter().collect();
    sorted.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let n = report.ms.len();
    Some(sorted.windows(2).all(|w| {
        (0..n).all(|i| (0..n).all(|j| w[1].matrix.get(i, j) >= w[0].matrix.get(i, j) * (1.0 - 1e-12)))
    }))
}

fn matrix_csv(w: &mut dyn Write, report: &ConvergenceReport, digest: &str) -> csv::Result<()> {
    writeln!(w, "# config_digest: {digest}")?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["m".to_string()];
    header.extend(report.ms.iter().map(|m| format!("{m:e}")));
    out.write_record(&header)?;
    for (m, row) in report.ms.iter().zip(report.distances.rows()) {
        let mut rec = vec![format!("{m:e}")];
        rec.extend(row.iter().map(|d| format!("{d:e}")));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

fn localized_csv(w: &mut dyn Write, report: &ConvergenceReport, digest: &str) -> csv::Result<()> {
    writeln!(w, "# config_digest: {digest}")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["radius", "m", "n", "distance"])?;
    for loc in &report.localized {
        for i in 0..report.ms.len() {
            for j in i + 1..report.ms.len() {
                out.write_record([
                    format!("{:e}", loc.radius),
                    format!("{:e}", report.ms[i]),
                    format!("{:e}", report.ms[j]),
                    format!("{:e}", loc.matrix.get(i, j)),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Family sweep over `sweep.ms`; writes distance tables and `cauchy.json`.
pub fn cmd_cauchy(cfg: &ExperimentConfig, out: &Path) -> Result<CauchySummary, ExperimentError> {
    let started = now();
    let digest = cfg.digest();
    let ms = &cfg.sweep.ms;
    if ms.len() < 3 {
        return Err(ExperimentError::Invalid(format!("cauchy needs at least 3 levels, got {}", ms.len())));
    }
    let grid = cfg.domain.grid()?;
    let phi = cfg.datum.sample(&grid)?;
    write_config(out, cfg)?;
    let records = match run_family(&grid, &cfg.scheme, &phi, ms) {
        Ok(r) => r,
        Err(ConvergenceError::Member { m, source, partial }) => {
            let completed_levels = ms.iter().zip(&partial).filter(|(_, r)| r.is_some()).map(|(m, _)| *m).collect();
            let summary = CauchySummary {
                status: format!("member m = {m} failed: {source}"),
                pass: false,
                completed_levels,
                report: None,
                localized_monotone: None,
                refinement: None,
                yudovich: None,
                dependence: None,
            };
            stamped_json(&out.join("cauchy.json"), &digest, &summary)?;
            write_meta(out, "cauchy", &digest, started)?;
            return Err(ExperimentError::Failed(summary.status));
        }
        Err(e) => return Err(e.into()),
    };
    let report = ConvergenceReport::build(&grid, &cfg.scheme, &phi, ms, &records, &cfg.sweep.radii)?;

    let refinement = if cfg.sweep.refine {
        let fine_domain = cfg.domain.refined();
        let fine = fine_domain.grid()?;
        let phi_fine = cfg.datum.sample(&fine)?;
        let fine_records = run_family(&fine, &cfg.scheme, &phi_fine, ms)?;
        let fine_report = ConvergenceReport::build(&fine, &cfg.scheme, &phi_fine, ms, &fine_records, &[])?;
        Some(refinement_check(&report, &fine_report)?)
    } else {
        None
    };

    let yudovich = if cfg.sweep.ps.is_empty() {
        None
    } else {
        let (u, v) = (&records[ms.len() - 1].final_state, &records[ms.len() - 2].final_state);
        Some(yudovich_probe(&grid, u, v, &cfg.sweep.ps)?)
    };

    let dependence = match (&cfg.sweep.perturbation, cfg.sweep.scales.is_empty()) {
        (Some(direction), false) => {
            let dir = direction.sample(&grid)?;
            let norm = grid.h1_norm(&dir);
            if norm == 0.0 {
                return Err(ExperimentError::Invalid("perturbation direction vanishes on the grid".into()));
            }
            Some(dependence_probe(&grid, &cfg.scheme, &phi, &dir.scale(1.0 / norm), &cfg.sweep.scales)?)
        }
        _ => None,
    };

    write_csv(&out.join("distances.csv"), |w| report.write_csv(w, &digest))?;
    write_csv(&out.join("matrix.csv"), |w| matrix_csv(w, &report, &digest))?;
    if !report.localized.is_empty() {
        write_csv(&out.join("localized.csv"), |w| localized_csv(w, &report, &digest))?;
    }
    let localized_monotone = localized_monotone(&report);
    let pass = report.violations == 0
        && report.diagonal_decreasing
        && localized_monotone != Some(false)
        && refinement.as_ref().is_none_or(|r| r.pass);
    let summary = CauchySummary {
        status: "completed".into(),
        pass,
        completed_levels: ms.clone(),
        report: Some(report),
        localized_monotone,
        refinement,
        yudovich,
        dependence,
    };
    stamped_json(&out.join("cauchy.json"), &digest, &summary)?;
    write_meta(out, "cauchy", &digest, started)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArtifactCheck {
    pub file: String,
    pub digest: Option<String>,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputReport {
    pub config_digest: String,
    pub artifacts: Vec<ArtifactCheck>,
    pub consistent: bool,
}

fn embedded_digest(path: &Path) -> Result<Option<String>, std::io::Error> {
    let bytes = std::fs::read(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    Ok(match ext {
        "csv" => String::from_utf8_lossy(&bytes)
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# config_digest: "))
            .map(str::to_string),
        "json" => serde_json::from_slice::<serde_json::Value>(&bytes)
            .ok()
            .and_then(|v| v.get("config_digest").and_then(|d| d.as_str()).map(str::to_string)),
        "bin" if bytes.len() >= 40 && &bytes[..8] == SNAPSHOT_MAGIC => Some(hex::encode(&bytes[8..40])),
        _ => None,
    })
}

fn artifact_files(dir: &Path) -> Result<Vec<PathBuf>, std::io::Error> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Recompute the digest of `dir/config.toml` and compare it with every artifact.
/// Snapshots carry the grid digest instead.
pub fn cmd_report(dir: &Path) -> Result<OutputReport, ExperimentError> {
    let cfg = ExperimentConfig::load(&dir.join("config.toml"))?;
    let digest = cfg.digest();
    let grid_digest = hex::encode(cfg.domain.grid()?.digest());
    let io = |source| ExperimentError::Io { path: dir.to_path_buf(), source };
    let mut artifacts = Vec::new();
    for path in artifact_files(dir).map_err(io)? {
        let name = path.strip_prefix(dir).unwrap_or(&path).to_string_lossy().replace('\\', "/");
        if name == "config.toml" || name == "meta.json" {
            continue;
        }
        let found = embedded_digest(&path).map_err(io)?;
        let expected = if name.ends_with(".bin") { &grid_digest } else { &digest };
        let matches = found.as_deref() == Some(expected.as_str());
        artifacts.push(ArtifactCheck { file: name, digest: found, matches });
    }
    let consistent = artifacts.iter().all(|a| a.matches);
    Ok(OutputReport { config_digest: digest, artifacts, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(scheme: &str, family: &str, datum: &str) -> ExperimentConfig {
        ExperimentConfig::parse(&format!(
            r#"
seed = 1
[domain]
bounding_box = [[-6.0, 6.0]]
spacing = [0.1]
[datum]
{datum}
[scheme]
scheme = "{scheme}"
family = {family}
m = 8.0
dt = 0.01
t_final = 0.5
snapshot_stride = 25
diagnostic_stride = 2
[sweep]
ms = [4.0, 8.0, 16.0]
radii = [1.0, 2.0, 4.0]
ps = [4.0, 8.0]
"#
        ))
        .unwrap()
    }

    fn damped() -> ExperimentConfig {
        config(
            "damped_truncated",
            r#"{ kind = "damping", alpha = 0.5 }"#,
            "profile = \"gaussian\"\ncenter = [0.0]\nwidth = 1.0\namplitude = 1.0",
        )
    }

    #[test]
    fn run_writes_consistent_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let s = cmd_run(&damped(), dir.path()).unwrap();
        assert_eq!(s.status, "completed");
        assert!(s.extinction_time.is_none());
        assert_eq!(s.snapshots.len(), 2);
        let r = cmd_report(dir.path()).unwrap();
        assert!(r.consistent, "{r:?}");
        assert!(r.artifacts.iter().any(|a| a.file == "diagnostics.csv"));
    }

    #[test]
    fn zero_datum_cauchy() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("damped_truncated", r#"{ kind = "damping", alpha = 0.5 }"#, "profile = \"zero\"");
        let s = cmd_cauchy(&cfg, dir.path()).unwrap();
        let report = s.report.unwrap();
        assert_eq!(report.distances.max(), 0.0);
        assert!(report.fit.is_none() && report.fit_skipped.is_some());
        assert!(s.pass);
        assert!(cmd_report(dir.path()).unwrap().consistent);
    }

    #[test]
    fn cauchy_needs_three_levels() {
        let mut cfg = damped();
        cfg.sweep.ms = vec![4.0, 8.0];
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(cmd_cauchy(&cfg, dir.path()), Err(ExperimentError::Invalid(_))));
    }

    #[test]
    fn log_family_localization_is_monotone_in_radius() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            "log_split_scheme",
            r#"{ kind = "logarithmic" }"#,
            "profile = \"gaussian\"\ncenter = [0.5]\nwidth = 1.0\namplitude = 1.0",
        );
        let s = cmd_cauchy(&cfg, dir.path()).unwrap();
        assert_eq!(s.localized_monotone, Some(true));
        assert!(s.yudovich.is_some());
    }

    #[test]
    fn tampered_artifact_detected() {
        let dir = tempfile::tempdir().unwrap();
        cmd_run(&damped(), dir.path()).unwrap();
        let path = dir.path().join("diagnostics.csv");
        let text = std::fs::read_to_string(&path).unwrap().replacen("# config_digest: ", "# config_digest: 00", 1);
        std::fs::write(&path, text).unwrap();
        assert!(!cmd_report(dir.path()).unwrap().consistent);
    }
}
