//! Randomized property suites.
//!
//! Samples are drawn in fixed chunks, each with its own ChaCha stream derived
//! from the seed, so reports do not depend on the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::convergence::{fit_rate, yudovich_probe};
use crate::fields::{spectral_field, white_field, SineSeries};
use crate::grid::{build_grid, DomainSpec, Grid, GridFunction};
use crate::nonlinearity::constants::{log_levels, random_pair, FrozenConstants};
use crate::nonlinearity::oracle::{inequality_oracle, InequalityKind};
use crate::nonlinearity::TruncationLevel;
use crate::resolvent::{
    yosida_difference, ResolventError, ResolventSolver, SineBasis, YosidaOperator, DEFAULT_CG_TOL,
};

const CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Pointwise,
    Yosida,
    Norms,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Pointwise => "pointwise",
            Suite::Yosida => "yosida",
            Suite::Norms => "norms",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown suite {0:?}; expected pointwise, yosida, norms or all")]
pub struct UnknownSuite(String);

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pointwise" => Ok(Suite::Pointwise),
            "yosida" => Ok(Suite::Yosida),
            "norms" => Ok(Suite::Norms),
            "all" => Ok(Suite::All),
            other => Err(UnknownSuite(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `(rhs − lhs)/(|lhs| + |rhs|)` seen (the smallest value itself
    /// for sign conditions); `None` without samples.
    pub worst_margin: Option<f64>,
    /// Measured values behind the check, e.g. fitted slopes (ensemble first).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub measured: Vec<f64>,
}

impl CheckSummary {
    fn empty(name: &str) -> Self {
        CheckSummary { name: name.to_string(), samples: 0, violations: 0, worst_margin: None, measured: Vec::new() }
    }

    fn record(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        if !(lhs <= rhs) {
            self.violations += 1;
        }
        let scale = lhs.abs() + rhs.abs();
        let margin = if scale > 0.0 { (rhs - lhs) / scale } else { 0.0 };
        self.worst_margin = Some(self.worst_margin.map_or(margin, |w: f64| w.min(margin)));
    }

    /// Lower bound `value ≥ 0`; the margin is the raw value.
    fn record_nonnegative(&mut self, value: f64) {
        self.samples += 1;
        if !(value >= 0.0) {
            self.violations += 1;
        }
        self.worst_margin = Some(self.worst_margin.map_or(value, |w: f64| w.min(value)));
    }

    fn merge(mut self, other: CheckSummary) -> Self {
        self.samples += other.samples;
        self.violations += other.violations;
        self.worst_margin = match (self.worst_margin, other.worst_margin) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.measured.extend(other.measured);
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub checks: Vec<CheckSummary>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

fn stream(seed: u64, check: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((check << 32) | chunk);
    rng
}

fn level<R: Rng>(rng: &mut R) -> TruncationLevel {
    TruncationLevel::new(2f64.powi(rng.random_range(0..=15))).expect("level at least 1")
}

const HOLDER_ALPHAS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

/// Pointwise inequalities on random complex pairs; `samples` pairs per check.
pub fn pointwise_suite(seed: u64, samples: usize) -> Vec<CheckSummary> {
    let constants = FrozenConstants::load();
    let levels = log_levels();
    type Draw = fn(&mut ChaCha8Rng, &[f64], usize) -> InequalityKind;
    let checks: [(&str, Draw); 6] = [
        ("log_imaginary", |_, _, _| InequalityKind::LogImaginary),
        ("log_regularized_a", |_, ls, k| InequalityKind::LogRegularizedA {
            m: TruncationLevel::new(ls[k % ls.len()]).expect("level"),
        }),
        ("log_regularized_b", |_, ls, k| InequalityKind::LogRegularizedB {
            m: TruncationLevel::new(ls[k % ls.len()]).expect("level"),
        }),
        ("damping_monotone", |rng, _, _| InequalityKind::DampingMonotone {
            alpha: rng.random_range(0.01..0.99),
            m: level(rng),
        }),
        ("power_lipschitz", |rng, _, k| InequalityKind::PowerLipschitz {
            lambda: if k % 2 == 0 { 1.0 } else { -1.0 },
            sigma: [1.0, 1.5, 2.0][(k / 2) % 3],
            m: level(rng),
        }),
        ("damping_holder", |_, _, k| InequalityKind::DampingHolder { alpha: HOLDER_ALPHAS[k % HOLDER_ALPHAS.len()] }),
    ];
    checks
        .iter()
        .enumerate()
        .map(|(id, (name, draw))| {
            let chunks = samples.div_ceil(CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = stream(seed, id as u64, c as u64);
                    let mut s = CheckSummary::empty(name);
                    let count = CHUNK.min(samples - c * CHUNK);
                    for k in 0..count {
                        let kind = draw(&mut rng, &levels, c * CHUNK + k);
                        let (u, v) = random_pair(&mut rng);
                        let out = inequality_oracle(&kind, &constants, u, v);
                        match kind {
                            InequalityKind::DampingMonotone { .. } => s.record_nonnegative(out.lhs),
                            _ => s.record(out.lhs, out.rhs),
                        }
                    }
                    s
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(CheckSummary::empty(name), CheckSummary::merge)
        })
        .collect()
}

/// Box `[0, π]²` with 64 interior nodes per axis.
pub fn yosida_grid() -> Grid {
    let h = std::f64::consts::PI / 65.0;
    build_grid(&DomainSpec::rectangle([0.0, std::f64::consts::PI], [0.0, std::f64::consts::PI], h, h).expect("box"))
        .expect("grid")
}

/// Levels `2⁴ … 2¹²`.
pub fn yosida_levels() -> Vec<f64> {
    (4..=12).map(|k| 2f64.powi(k)).collect()
}

/// Allowed deviation of the fitted `J_m` dyadic slope from `−1/2`.
pub const SLOPE_BAND: f64 = 0.1;

/// `‖J_m v − J_{2m} v‖₂` for `m = 2⁴ … 2¹¹`.
pub fn yosida_dyadic_distances(grid: &Grid, basis: &SineBasis, v: &GridFunction) -> Result<Vec<f64>, ResolventError> {
    let ops = yosida_levels()
        .iter()
        .map(|&m| YosidaOperator::with_basis(grid, m, basis.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    ops.windows(2).map(|w| Ok(yosida_difference(&w[0], &w[1], v)?.distance)).collect()
}

fn dyadic_exponent(d: &[f64]) -> f64 {
    let levels = yosida_levels();
    fit_rate(&levels[..d.len()], d).map(|f| f.exponent).unwrap_or(f64::NAN)
}

/// Fitted exponent of the root-mean-square dyadic distance over `fields`,
/// and the exponent of each field on its own.
pub fn yosida_slope(grid: &Grid, basis: &SineBasis, fields: &[GridFunction]) -> Result<(f64, Vec<f64>), ResolventError> {
    let per_field = fields
        .par_iter()
        .map(|v| yosida_dyadic_distances(grid, basis, v))
        .collect::<Result<Vec<_>, _>>()?;
    let n = yosida_levels().len() - 1;
    let rms: Vec<f64> = (0..n)
        .map(|k| (per_field.iter().map(|d| d[k] * d[k]).sum::<f64>() / per_field.len() as f64).sqrt())
        .collect();
    Ok((dyadic_exponent(&rms), per_field.iter().map(|d| dyadic_exponent(d)).collect()))
}

/// Resolvent properties on `samples` random fields.
pub fn yosida_suite(seed: u64, samples: usize) -> Result<Vec<CheckSummary>, ResolventError> {
    let grid = yosida_grid();
    let basis = SineBasis::new(&grid).expect("full rectangle");
    let levels = yosida_levels();
    let lap_norm: f64 = grid.spacing().iter().map(|h| 4.0 / (h * h)).sum();
    let per_field = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, 100, k as u64);
            let m = levels[k % levels.len()];
            let n = levels[(k + 1) % levels.len()];
            let f = white_field(&mut rng, grid.len());
            let g = white_field(&mut rng, grid.len());
            let op = YosidaOperator::with_basis(&grid, m, basis.clone())?;
            let other = YosidaOperator::with_basis(&grid, n, basis.clone())?;
            let cg = YosidaOperator::new(&grid, m, ResolventSolver::ConjugateGradient { tol: DEFAULT_CG_TOL, max_iter: 10_000 })?;
            let mut out = vec![
                CheckSummary::empty("contraction"),
                CheckSummary::empty("self_adjoint"),
                CheckSummary::empty("t_identity"),
                CheckSummary::empty("interpolation_bound"),
                CheckSummary::empty("t_bound"),
            ];
            let (jf, jg) = (op.apply(&f)?, op.apply(&g)?);
            let (nf, ng) = (grid.l2_norm(&f), grid.l2_norm(&g));
            out[0].record(grid.l2_norm(&jf), nf);
            out[1].record((grid.inner(&jf, &g) - grid.inner(&f, &jg)).norm(), 1e-10 * nf * ng);
            let jcg = cg.apply(&f)?;
            let t = cg.apply_t(&f)?;
            let lap = grid.apply_laplacian(&jcg);
            let eps = f64::EPSILON;
            out[2].record(grid.l2_norm(&(&t - &lap)), (m * DEFAULT_CG_TOL + 64.0 * eps * lap_norm) * nf);
            // smooth random field for the H¹ bounds
            let v = spectral_field(&mut rng, &basis, 1.0);
            let diff = yosida_difference(&op, &other, &v)?;
            out[3].record(diff.distance, diff.bound);
            out[4].record(diff.t_norm, diff.t_bound);
            Ok(out)
        })
        .collect::<Result<Vec<_>, ResolventError>>()?;
    let mut checks: Vec<CheckSummary> = ["contraction", "self_adjoint", "t_identity", "interpolation_bound", "t_bound"]
        .iter()
        .map(|n| CheckSummary::empty(n))
        .collect();
    for field in per_field {
        for (acc, c) in checks.iter_mut().zip(field) {
            *acc = std::mem::replace(acc, CheckSummary::empty("")).merge(c);
        }
    }
    let fields: Vec<GridFunction> = (0..samples.min(8))
        .map(|k| spectral_field(&mut stream(seed, 101, k as u64), &basis, 1.0))
        .collect();
    let mut slope = CheckSummary::empty("dyadic_slope");
    if !fields.is_empty() {
        let (ensemble, individual) = yosida_slope(&grid, &basis, &fields)?;
        slope.record((ensemble + 0.5).abs(), SLOPE_BAND);
        slope.measured = std::iter::once(ensemble).chain(individual).collect();
    }
    checks.push(slope);
    Ok(checks)
}

/// Exponents of the interpolation check.
pub const HOLDER_PS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];
/// Exponents of the `√p` ratio.
pub const RATIO_PS: [f64; 5] = [4.0, 8.0, 16.0, 32.0, 64.0];
/// Allowed relative change of the `√p` ratio supremum under refinement.
pub const RATIO_STABILITY: f64 = 0.2;

fn disk_grid() -> Grid {
    let spec = DomainSpec::rectangle([-1.0, 1.0], [-1.0, 1.0], 1.0 / 24.0, 1.0 / 24.0)
        .expect("box")
        .restrict(|x| x[0] * x[0] + x[1] * x[1] < 0.9);
    build_grid(&spec).expect("grid")
}

fn square(h: f64) -> Grid {
    build_grid(&DomainSpec::rectangle([0.0, 1.0], [0.0, 1.0], h, h).expect("box")).expect("grid")
}

/// Largest `‖v‖_{2p}/(√p ‖v‖_{H¹})` over fields and `p`.
pub fn sqrt_p_sup(grid: &Grid, fields: &[SineSeries]) -> f64 {
    fields
        .par_iter()
        .map(|s| {
            let v = s.sample(grid);
            let r = yudovich_probe(grid, &GridFunction::zeros(grid.len()), &v, &RATIO_PS).expect("exponents");
            r.entries.iter().map(|e| e.sqrt_p_ratio).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Discrete Hölder interpolation and `√p` ratio stability.
pub fn norms_suite(seed: u64, samples: usize) -> Vec<CheckSummary> {
    let disk = disk_grid();
    let coarse = square(1.0 / 32.0);
    let fine = square(1.0 / 64.0);
    let mut holder = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, 200, k as u64);
            let (grid, v) = if k % 2 == 0 {
                (&disk, white_field(&mut rng, disk.len()))
            } else {
                let series = SineSeries::random(&mut rng, &[[0.0, 1.0], [0.0, 1.0]], 6, 1.0);
                (&coarse, series.sample(&coarse))
            };
            let mut s = CheckSummary::empty("holder_interpolation");
            let r = yudovich_probe(grid, &v, &GridFunction::zeros(grid.len()), &HOLDER_PS).expect("exponents");
            for e in &r.entries {
                s.record(e.distance, e.interpolation_bound * (1.0 + 1e-12));
            }
            s
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(CheckSummary::empty("holder_interpolation"), CheckSummary::merge);
    holder.name = "holder_interpolation".into();

    let ensemble: Vec<SineSeries> = (0..samples.min(100))
        .map(|k| {
            let mut rng = stream(seed, 201, k as u64);
            SineSeries::random(&mut rng, &[[0.0, 1.0], [0.0, 1.0]], 6, 2.0)
        })
        .collect();
    let mut ratio = CheckSummary::empty("sqrt_p_ratio_stability");
    if !ensemble.is_empty() {
        let (a, b) = (sqrt_p_sup(&coarse, &ensemble), sqrt_p_sup(&fine, &ensemble));
        ratio.record((b / a - 1.0).abs(), RATIO_STABILITY);
        ratio.measured = vec![a, b];
    }
    vec![holder, ratio]
}

pub fn run_suite(suite: Suite, seed: u64, samples: usize) -> Result<SuiteReport, ResolventError> {
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    if samples == 0 {
        warnings.push("samples = 0: every check passes vacuously".to_string());
        log::warn!("{}", warnings[0]);
    }
    if matches!(suite, Suite::Pointwise | Suite::All) {
        checks.extend(pointwise_suite(seed, samples));
    }
    if matches!(suite, Suite::Yosida | Suite::All) {
        checks.extend(yosida_suite(seed, samples)?);
    }
    if matches!(suite, Suite::Norms | Suite::All) {
        checks.extend(norms_suite(seed, samples));
    }
    let passed = checks.iter().all(CheckSummary::passed);
    Ok(SuiteReport { suite, seed, samples, checks, warnings, passed })
}
