//! The resolvent `J_m = (I − Δ/m)⁻¹` of the discrete Dirichlet Laplacian and
//! the derived operator `T_m = Δ J_m = m(J_m − I)`.

pub mod dense;
pub mod krylov;
pub mod spectral;
pub mod split_check;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridError, GridFunction};
use dense::{DenseResolvent, DENSE_LIMIT};
pub use krylov::{SolveStats, SolverError};
pub use spectral::SineBasis;
pub use split_check::{cutoff_split_check, SplitReport};

#[derive(Debug, Error, PartialEq)]
pub enum ResolventError {
    #[error("resolvent parameter must be positive, got {0}")]
    Parameter(f64),
    #[error("sine-transform solver needs a full-rectangle mask")]
    NotRectangle,
    #[error("dense solver limited to {DENSE_LIMIT} unknowns, grid has {0}")]
    TooLarge(usize),
    #[error("operators live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolventSolver {
    FastSineTransform,
    ConjugateGradient { tol: f64, max_iter: usize },
    DenseDirect,
}

pub const DEFAULT_CG_TOL: f64 = 1e-12;

impl ResolventSolver {
    /// Sine transform on full rectangles, CG otherwise.
    pub fn automatic(grid: &Grid) -> Self {
        if grid.is_full_rectangle() {
            ResolventSolver::FastSineTransform
        } else {
            ResolventSolver::ConjugateGradient { tol: DEFAULT_CG_TOL, max_iter: 20_000 }
        }
    }
}

#[derive(Clone, Debug)]
enum Backend {
    Spectral(SineBasis),
    Krylov { tol: f64, max_iter: usize },
    Dense(DenseResolvent),
}

/// `J_m` on a fixed grid with a chosen solver.
#[derive(Clone, Debug)]
pub struct YosidaOperator<'g> {
    grid: &'g Grid,
    m: f64,
    backend: Backend,
}

impl<'g> YosidaOperator<'g> {
    pub fn new(grid: &'g Grid, m: f64, solver: ResolventSolver) -> Result<Self, ResolventError> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(ResolventError::Parameter(m));
        }
        let backend = match solver {
            ResolventSolver::FastSineTransform => {
                Backend::Spectral(SineBasis::new(grid).ok_or(ResolventError::NotRectangle)?)
            }
            ResolventSolver::ConjugateGradient { tol, max_iter } => Backend::Krylov { tol, max_iter },
            ResolventSolver::DenseDirect => Backend::Dense(
                DenseResolvent::new(grid, m).ok_or(ResolventError::TooLarge(grid.len()))?,
            ),
        };
        Ok(YosidaOperator { grid, m, backend })
    }

    /// Spectral solver sharing an already planned basis.
    pub fn with_basis(grid: &'g Grid, m: f64, basis: SineBasis) -> Result<Self, ResolventError> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(ResolventError::Parameter(m));
        }
        Ok(YosidaOperator { grid, m, backend: Backend::Spectral(basis) })
    }

    pub fn grid(&self) -> &'g Grid {
        self.grid
    }

    pub fn level(&self) -> f64 {
        self.m
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction, ResolventError> {
        self.apply_with_stats(f).map(|(v, _)| v)
    }

    pub fn apply_with_stats(&self, f: &GridFunction) -> Result<(GridFunction, SolveStats), ResolventError> {
        self.grid.check(f)?;
        let m = self.m;
        let exact = SolveStats { iterations: 0, residual: 0.0 };
        let out = match &self.backend {
            Backend::Spectral(basis) => {
                (basis.apply_multiplier(f, |mu| Complex64::new(1.0 / (1.0 + mu / m), 0.0)), exact)
            }
            Backend::Dense(d) => (d.apply(f), exact),
            Backend::Krylov { tol, max_iter } => {
                let grid = self.grid;
                let op = |x: &[Complex64], y: &mut [Complex64]| {
                    grid.laplacian_into(x, y);
                    for (yi, xi) in y.iter_mut().zip(x) {
                        *yi = xi - *yi / m;
                    }
                };
                let mut x = f.values().to_vec();
                let stats = krylov::solve(op, f.values(), &mut x, krylov::Bilinear::Hermitian, *tol, *max_iter)?;
                log::debug!("resolvent m={m}: {} iterations, residual {:e}", stats.iterations, stats.residual);
                (GridFunction::from_vec(x), stats)
            }
        };
        Ok(out)
    }

    /// `T_m v = Δ J_m v = m(J_m v − v)`.
    pub fn apply_t(&self, v: &GridFunction) -> Result<GridFunction, ResolventError> {
        let j = self.apply(v)?;
        Ok((&j - v).scale(self.m))
    }
}

/// Distance between two regularizations and the interpolation bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YosidaDifference {
    /// `‖J_m v − J_n v‖₂`
    pub distance: f64,
    /// `√2 (m^{-1/2} + n^{-1/2}) ‖v‖_{H¹}`
    pub bound: f64,
    /// `‖T_m v‖₂`
    pub t_norm: f64,
    /// `√(2m) ‖v‖_{H¹}`
    pub t_bound: f64,
}

pub fn yosida_difference(
    opm: &YosidaOperator<'_>,
    opn: &YosidaOperator<'_>,
    v: &GridFunction,
) -> Result<YosidaDifference, ResolventError> {
    let grid = opm.grid;
    if !std::ptr::eq(grid, opn.grid) && grid.spec() != opn.grid.spec() {
        return Err(ResolventError::GridMismatch);
    }
    let h1 = grid.h1_norm(v);
    let (m, n) = (opm.m, opn.m);
    let jm = opm.apply(v)?;
    let distance = if m == n { 0.0 } else { grid.l2_norm(&(&jm - &opn.apply(v)?)) };
    let t = (&jm - v).scale(m);
    Ok(YosidaDifference {
        distance,
        bound: 2f64.sqrt() * (m.powf(-0.5) + n.powf(-0.5)) * h1,
        t_norm: grid.l2_norm(&t),
        t_bound: (2.0 * m).sqrt() * h1,
    })
}
