//! Initial data and random field ensembles.
//!
//! Named profiles are evaluated pointwise from their continuum formulas, so
//! the same datum can be sampled on grids of different resolution.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::grid::{Grid, GridFunction};
use crate::resolvent::SineBasis;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Datum {
    /// `A exp(−|x − c|²/w²) e^{i k·x}`
    Gaussian {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
        #[serde(default)]
        momentum: Vec<f64>,
    },
    /// Product of box sines `sin(k_a π (x_a − lo_a)/L_a)`.
    SineMode { k: Vec<usize>, #[serde(default = "unit")] amplitude: f64 },
    /// `A exp(−(|x| − r)²/w²)`
    Ring { radius: f64, width: f64, amplitude: f64 },
    /// `A sech(|x − c|/w)`
    Sech { center: Vec<f64>, width: f64, amplitude: f64 },
    /// Compactly supported `A exp(1 − 1/(1 − s²))`, `s = |x − c|/r < 1`.
    Bump { center: Vec<f64>, radius: f64, amplitude: f64 },
    /// Binary snapshot written for the same grid.
    Snapshot { path: String },
    Zero,
}

fn unit() -> f64 {
    1.0
}

fn offset(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(a, xa)| (xa - c.get(a).copied().unwrap_or(0.0)).powi(2))
        .sum::<f64>()
        .sqrt()
}

impl Datum {
    /// Evaluate at a point of a domain with bounding box `bbox`.
    pub fn value(&self, x: &[f64], bbox: &[[f64; 2]]) -> Complex64 {
        match self {
            Datum::Gaussian { center, width, amplitude, momentum } => {
                let r = offset(x, center);
                let phase: f64 = momentum.iter().zip(x).map(|(k, x)| k * x).sum();
                Complex64::from_polar(amplitude * (-(r / width).powi(2)).exp(), phase)
            }
            Datum::SineMode { k, amplitude } => {
                let v: f64 = x
                    .iter()
                    .zip(bbox)
                    .enumerate()
                    .map(|(a, (xa, [lo, hi]))| {
                        let ka = k.get(a).copied().unwrap_or(1) as f64;
                        (ka * std::f64::consts::PI * (xa - lo) / (hi - lo)).sin()
                    })
                    .product();
                Complex64::new(amplitude * v, 0.0)
            }
            Datum::Ring { radius, width, amplitude } => {
                let r = offset(x, &[]);
                Complex64::new(amplitude * (-((r - radius) / width).powi(2)).exp(), 0.0)
            }
            Datum::Sech { center, width, amplitude } => {
                Complex64::new(amplitude / (offset(x, center) / width).cosh(), 0.0)
            }
            Datum::Bump { center, radius, amplitude } => {
                let s = offset(x, center) / radius;
                if s < 1.0 {
                    Complex64::new(amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Datum::Snapshot { .. } | Datum::Zero => Complex64::new(0.0, 0.0),
        }
    }

    /// Sample on `grid`; snapshots are read from disk.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction, crate::grid::io::SnapshotError> {
        match self {
            Datum::Snapshot { path } => {
                let file = std::fs::File::open(path)?;
                crate::grid::io::read_snapshot(std::io::BufReader::new(file), grid)
            }
            Datum::Zero => Ok(GridFunction::zeros(grid.len())),
            _ => {
                let bbox = grid.spec().bounding_box.clone();
                Ok(grid.sample(|x| self.value(x, &bbox)))
            }
        }
    }
}

/// Finite sine series with coefficients on box modes, evaluated pointwise.
#[derive(Clone, Debug, PartialEq)]
pub struct SineSeries {
    pub bounding_box: Vec<[f64; 2]>,
    pub terms: Vec<(Vec<usize>, Complex64)>,
}

fn normal<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

impl SineSeries {
    /// Modes with every `k_a ≤ kmax`, coefficient `N(0,1)_ℂ · |k|^{−decay}`.
    pub fn random<R: Rng>(rng: &mut R, bounding_box: &[[f64; 2]], kmax: usize, decay: f64) -> Self {
        let dim = bounding_box.len();
        let mut terms = Vec::new();
        let mut k = vec![1usize; dim];
        loop {
            let norm2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
            terms.push((k.clone(), normal(rng) * norm2.powf(-decay / 2.0)));
            let mut a = dim;
            loop {
                if a == 0 {
                    return SineSeries { bounding_box: bounding_box.to_vec(), terms };
                }
                a -= 1;
                if k[a] < kmax {
                    k[a] += 1;
                    break;
                }
                k[a] = 1;
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        let pi = std::f64::consts::PI;
        self.terms
            .iter()
            .map(|(k, c)| {
                let s: f64 = k
                    .iter()
                    .zip(x)
                    .zip(&self.bounding_box)
                    .map(|((&ka, xa), [lo, hi])| (ka as f64 * pi * (xa - lo) / (hi - lo)).sin())
                    .product();
                c * s
            })
            .sum()
    }

    pub fn sample(&self, grid: &Grid) -> GridFunction {
        grid.sample(|x| self.value(x))
    }
}

/// Random field on a full rectangle with discrete sine coefficients of
/// modulus `∝ μ_k^{−exponent}` (`−Δ s_k = μ_k s_k`).
pub fn spectral_field<R: Rng>(rng: &mut R, basis: &SineBasis, exponent: f64) -> GridFunction {
    let coefficients: Vec<Complex64> =
        basis.eigenvalues().iter().map(|mu| normal(rng) * mu.powf(-exponent)).collect();
    GridFunction::from_vec(basis.synthesize(&coefficients))
}

/// Uniform random field in the unit square of ℂ at every node.
pub fn white_field<R: Rng>(rng: &mut R, n: usize) -> GridFunction {
    GridFunction::from_vec(
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}
