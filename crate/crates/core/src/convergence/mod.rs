//! Families of approximate solutions indexed by the truncation level and
//! the distances between them.

pub mod fit;
pub mod probes;
pub mod residual;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::evolution::{evolve, EvolutionError, Scheme, SchemeConfig, TrajectoryRecord};
use crate::grid::{Grid, GridError, GridFunction};
use crate::nonlinearity::TruncationLevel;

pub use fit::{fit_rate, FitError, RateFit};
pub use probes::{dependence_probe, yudovich_probe, DependenceReport, YudovichReport};
pub use residual::{truncation_residual, TruncationResidual};

#[derive(Debug, Error)]
pub enum ConvergenceError {
    #[error("levels must be finite, at least 1 and strictly increasing")]
    Levels,
    #[error("run for m = {m} failed: {source}")]
    Member {
        m: f64,
        #[source]
        source: EvolutionError,
        /// Runs that did finish, in level order.
        partial: Vec<Option<TrajectoryRecord>>,
    },
    #[error("records are not aligned: {0}")]
    Misaligned(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Run `base` at every level in `ms`, in parallel; results keep the order of `ms`.
pub fn run_family(
    grid: &Grid,
    base: &SchemeConfig,
    phi: &GridFunction,
    ms: &[f64],
) -> Result<Vec<TrajectoryRecord>, ConvergenceError> {
    if ms.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ConvergenceError::Levels);
    }
    let levels = ms
        .iter()
        .map(|&m| TruncationLevel::new(m).map_err(|_| ConvergenceError::Levels))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<Result<TrajectoryRecord, EvolutionError>> =
        levels.par_iter().map(|&m| evolve(grid, &base.with_level(m), phi)).collect();
    if let Some(i) = results.iter().position(|r| r.is_err()) {
        let mut partial = Vec::with_capacity(results.len());
        let mut failure = None;
        for (k, r) in results.into_iter().enumerate() {
            match r {
                Ok(rec) => partial.push(Some(rec)),
                Err(e) => {
                    if k == i {
                        failure = Some(e);
                    }
                    partial.push(None);
                }
            }
        }
        log::warn!("family member m = {} failed", ms[i]);
        return Err(ConvergenceError::Member { m: ms[i], source: failure.expect("failed member"), partial });
    }
    Ok(results.into_iter().map(|r| r.expect("checked above")).collect())
}

/// Symmetric matrix of sup-in-time distances.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DistanceMatrix(Vec<Vec<f64>>);

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.len()).all(|i| self.0[i][i] == 0.0 && (0..i).all(|j| self.0[i][j] == self.0[j][i]))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |a, &b| a.max(b))
    }
}

fn check_aligned(grid: &Grid, records: &[TrajectoryRecord]) -> Result<(), ConvergenceError> {
    let Some(first) = records.first() else { return Ok(()) };
    for (k, r) in records.iter().enumerate() {
        if r.final_state.len() != grid.len() {
            return Err(ConvergenceError::Grid(GridError::FieldLength { expected: grid.len(), got: r.final_state.len() }));
        }
        if r.fields.len() != first.fields.len() || r.dt != first.dt {
            return Err(ConvergenceError::Misaligned(format!("record {k} has a different time grid")));
        }
        if r.fields.iter().any(|f| f.len() != grid.len()) {
            return Err(ConvergenceError::Misaligned(format!("record {k} holds fields of another grid")));
        }
    }
    Ok(())
}

/// Entry `(i, j)` is `max_t ‖ψ_R (u_i(t) − u_j(t))‖₂`; without `R` the cutoff is omitted.
pub fn cauchy_distances(
    grid: &Grid,
    records: &[TrajectoryRecord],
    localization: Option<f64>,
) -> Result<DistanceMatrix, ConvergenceError> {
    check_aligned(grid, records)?;
    let weight = localization.map(|r| grid.cutoff_field(r));
    let n = records.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let mut sup = 0.0f64;
            for (a, b) in records[i].fields.iter().zip(&records[j].fields) {
                let diff = a - b;
                let dist = match &weight {
                    Some(w) => grid.l2_norm(&diff.weighted(w)),
                    None => grid.l2_norm(&diff),
                };
                sup = sup.max(dist);
            }
            d[i][j] = sup;
            d[j][i] = sup;
        }
    }
    Ok(DistanceMatrix(d))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairDistance {
    pub m: f64,
    pub n: f64,
    pub distance: f64,
    /// Analytic bound on `distance²`, where one is known.
    pub bound: Option<f64>,
    pub pass: Option<bool>,
}

/// Pairs `(m, 2m)` present in `ms`.
pub fn dyadic_pairs(ms: &[f64]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &m) in ms.iter().enumerate() {
        if let Some(j) = ms.iter().position(|&n| (n - 2.0 * m).abs() <= 1e-12 * n) {
            out.push((i, j));
        }
    }
    out
}

/// `8 T |Ω|^{1/2} ‖φ‖₂ (m^{−(1−α)} + n^{−(1−α)})`, a bound on `sup_t ‖u_m − u_n‖₂²`.
pub fn damped_pair_bound(t_final: f64, measure: f64, phi_l2: f64, alpha: f64, m: f64, n: f64) -> f64 {
    let e = -(1.0 - alpha);
    8.0 * t_final * measure.sqrt() * phi_l2 * (m.powf(e) + n.powf(e))
}

/// Strictly decreasing, except that a run of exact zeros is allowed to continue.
pub fn is_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizedDistances {
    pub radius: f64,
    pub matrix: DistanceMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub ms: Vec<f64>,
    pub distances: DistanceMatrix,
    pub localized: Vec<LocalizedDistances>,
    /// Every pair `i < j` with its analytic bound, where the scheme has one.
    pub pairs: Vec<PairDistance>,
    /// Dyadic pairs `(m, 2m)` in increasing `m`.
    pub diagonal: Vec<PairDistance>,
    /// Smallest level included in the monotonicity check.
    pub activation: f64,
    /// `max_{m,t} ‖u_m(t)‖_∞` for power truncations.
    pub plateau: Option<f64>,
    pub diagonal_decreasing: bool,
    pub fit: Option<RateFit>,
    pub fit_skipped: Option<String>,
    pub violations: usize,
}

impl ConvergenceReport {
    pub fn build(
        grid: &Grid,
        config: &SchemeConfig,
        phi: &GridFunction,
        ms: &[f64],
        records: &[TrajectoryRecord],
        radii: &[f64],
    ) -> Result<Self, ConvergenceError> {
        if ms.len() != records.len() {
            return Err(ConvergenceError::Misaligned(format!("{} levels for {} records", ms.len(), records.len())));
        }
        let distances = cauchy_distances(grid, records, None)?;
        let localized = radii
            .iter()
            .map(|&radius| Ok(LocalizedDistances { radius, matrix: cauchy_distances(grid, records, Some(radius))? }))
            .collect::<Result<Vec<_>, ConvergenceError>>()?;

        let alpha = match config.scheme {
            Scheme::DampedTruncated => config.family.damping_exponent(),
            _ => None,
        };
        let phi_l2 = grid.l2_norm(phi);
        let pair = |i: usize, j: usize| {
            let (m, n) = (ms[i], ms[j]);
            let distance = distances.get(i, j);
            let bound = alpha.map(|a| damped_pair_bound(config.t_final, grid.measure(), phi_l2, a, m, n));
            PairDistance { m, n, distance, bound, pass: bound.map(|b| distance * distance <= b) }
        };
        let mut pairs = Vec::new();
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                pairs.push(pair(i, j));
            }
        }
        let diagonal: Vec<PairDistance> = dyadic_pairs(ms).into_iter().map(|(i, j)| pair(i, j)).collect();

        // Above the largest modulus reached by a power family member its truncation is inactive.
        let plateau = match config.family.damping_exponent() {
            None if config.scheme == Scheme::TruncatedDirect => Some(
                records.iter().flat_map(|r| r.diagnostics.iter().map(|d| d.linf)).fold(0.0, f64::max),
            ),
            _ => None,
        };
        let activation = ms.first().copied().unwrap_or(1.0);
        let active: Vec<f64> = diagonal.iter().filter(|p| p.m >= activation).map(|p| p.distance).collect();
        let diagonal_decreasing = is_decreasing(&active);

        let (fit, fit_skipped) = if diagonal.len() < 3 {
            (None, Some(format!("{} dyadic pairs; at least 3 needed", diagonal.len())))
        } else if diagonal.iter().any(|p| p.distance <= 0.0) {
            (None, Some("zero distance on the dyadic diagonal".to_string()))
        } else {
            let m: Vec<f64> = diagonal.iter().map(|p| p.m).collect();
            let d: Vec<f64> = diagonal.iter().map(|p| p.distance).collect();
            match fit_rate(&m, &d) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            }
        };
        let violations = pairs.iter().filter(|p| p.pass == Some(false)).count();
        Ok(ConvergenceReport {
            ms: ms.to_vec(),
            distances,
            localized,
            pairs,
            diagonal,
            activation,
            plateau,
            diagonal_decreasing,
            fit,
            fit_skipped,
            violations,
        })
    }

    /// CSV rows `m, n, distance, bound, pass` after a digest comment line.
    pub fn write_csv<W: Write>(&self, mut w: W, digest: &str) -> csv::Result<()> {
        writeln!(w, "# config_digest: {digest}")?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["m", "n", "distance", "bound", "pass"])?;
        for p in &self.pairs {
            out.write_record([
                format!("{:e}", p.m),
                format!("{:e}", p.n),
                format!("{:e}", p.distance),
                p.bound.map(|b| format!("{b:e}")).unwrap_or_default(),
                p.pass.map(|b| b.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RefinedPair {
    pub m: f64,
    pub n: f64,
    pub coarse: f64,
    pub fine: f64,
    pub bound: f64,
    /// `|coarse − fine|`, the measured discretization slack on `distance²`.
    pub slack: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementCheck {
    pub pairs: Vec<RefinedPair>,
    /// Violations of the bound without slack never grow from the coarse to the fine grid.
    pub slack_shrinks: bool,
    pub pass: bool,
}

/// Compare squared pair distances from two resolutions against the same bounds.
pub fn refinement_check(coarse: &ConvergenceReport, fine: &ConvergenceReport) -> Result<RefinementCheck, ConvergenceError> {
    if coarse.ms != fine.ms {
        return Err(ConvergenceError::Misaligned("level lists differ".into()));
    }
    let mut pairs = Vec::new();
    let mut slack_shrinks = true;
    for (c, f) in coarse.pairs.iter().zip(&fine.pairs) {
        let (Some(bc), Some(bf)) = (c.bound, f.bound) else { continue };
        let (dc, df) = (c.distance * c.distance, f.distance * f.distance);
        let bound = bc.min(bf);
        let slack = (dc - df).abs();
        if (df - bound).max(0.0) > (dc - bound).max(0.0) {
            slack_shrinks = false;
        }
        pairs.push(RefinedPair { m: c.m, n: c.n, coarse: dc, fine: df, bound, slack, pass: df <= bound + slack });
    }
    let pass = slack_shrinks && pairs.iter().all(|p| p.pass);
    Ok(RefinementCheck { pairs, slack_shrinks, pass })
}
