//! Strang-split time integration of the regularized equations.
//!
//! One step is: half nonlinear flow, full linear flow, half nonlinear flow.
//! The nonlinear flows are exact pointwise except for the Yosida scheme,
//! whose nonlocal term is integrated with classical RK4 and adaptive
//! substepping on the mass drift.

mod config;
pub mod energy;
mod record;
pub mod substeps;

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{Grid, GridError, GridFunction};
use crate::nonlinearity::{Nonlinearity, NonlinearityFamily, TruncationLevel};
use crate::resolvent::{ResolventError, ResolventSolver, SineBasis, SolverError, YosidaOperator};

pub use config::{LinearSubstep, Scheme, SchemeConfig};
pub use energy::{energy, Energies};
pub use record::{Diagnostics, Snapshot, TrajectoryRecord};
use substeps::LinearPropagator;

/// Relative mass drift tolerated in one Yosida nonlinear substep.
pub const YOSIDA_MASS_TOL: f64 = 1e-10;
const YOSIDA_MAX_SUBSTEPS: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid scheme configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Resolvent(#[from] ResolventError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("negative time step {0} for a dissipative scheme")]
    Backward(f64),
    #[error("Yosida substep did not reach the mass tolerance with {0} stages")]
    Substeps(usize),
    #[error("field became non-finite at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64, partial: Box<TrajectoryRecord> },
}

/// Integrator for one scheme on one grid.
pub struct Evolver<'g> {
    grid: &'g Grid,
    config: SchemeConfig,
    nonlinearity: Nonlinearity,
    linear: LinearPropagator,
    yosida: Option<YosidaOperator<'g>>,
    table: Option<(f64, Vec<Complex64>)>,
    substeps: usize,
    pub max_substeps: usize,
}

impl<'g> Evolver<'g> {
    pub fn new(grid: &'g Grid, config: SchemeConfig) -> Result<Self, EvolutionError> {
        config.validate(grid)?;
        let basis = SineBasis::new(grid);
        let linear = match config.linear_substep {
            LinearSubstep::SpectralExact => LinearPropagator::Spectral(basis.clone().expect("validated full rectangle")),
            LinearSubstep::CrankNicolson { tol } => LinearPropagator::CrankNicolson { tol },
        };
        let (nonlinearity, yosida) = match config.scheme {
            Scheme::YosidaRegularized => {
                let op = match basis {
                    Some(b) => YosidaOperator::with_basis(grid, config.m.value(), b)?,
                    None => YosidaOperator::new(grid, config.m.value(), ResolventSolver::automatic(grid))?,
                };
                (config.family.at_level(TruncationLevel::NONE), Some(op))
            }
            _ => (config.family.at_level(config.m), None),
        };
        Ok(Evolver {
            grid,
            config,
            nonlinearity,
            linear,
            yosida,
            table: None,
            substeps: 1,
            max_substeps: 1,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn linear_substep(&mut self, u: &mut GridFunction, tau: f64) -> Result<(), EvolutionError> {
        match &self.linear {
            LinearPropagator::Spectral(basis) => {
                if tau == 0.0 {
                    return Ok(());
                }
                let fresh = !matches!(&self.table, Some((t, _)) if *t == tau);
                if fresh {
                    self.table = Some((tau, LinearPropagator::phase_table(basis, tau)));
                }
                basis.apply_table(u, &self.table.as_ref().unwrap().1);
                Ok(())
            }
            cn => Ok(cn.apply(self.grid, u, tau)?),
        }
    }

    pub fn nonlinear_substep(&mut self, u: &mut GridFunction, tau: f64) -> Result<(), EvolutionError> {
        if tau < 0.0 && self.config.family.is_dissipative() {
            return Err(EvolutionError::Backward(tau));
        }
        match &self.yosida {
            None => {
                substeps::nonlinear_flow(&self.nonlinearity, u, tau);
                Ok(())
            }
            Some(op) => {
                let m0 = self.grid.mass(u);
                let mut n = self.substeps;
                loop {
                    let mut trial = u.clone();
                    yosida_rk4(op, &self.nonlinearity, &mut trial, tau, n)?;
                    let drift = (self.grid.mass(&trial) - m0).abs();
                    if drift <= YOSIDA_MASS_TOL * m0.max(f64::MIN_POSITIVE) || m0 == 0.0 {
                        *u = trial;
                        self.substeps = n;
                        self.max_substeps = self.max_substeps.max(n);
                        return Ok(());
                    }
                    n *= 2;
                    if n > YOSIDA_MAX_SUBSTEPS {
                        return Err(EvolutionError::Substeps(n / 2));
                    }
                }
            }
        }
    }

    /// One Strang step of size `dt` (negative allowed for Hamiltonian schemes).
    pub fn step(&mut self, u: &mut GridFunction, dt: f64) -> Result<(), EvolutionError> {
        self.nonlinear_substep(u, 0.5 * dt)?;
        self.linear_substep(u, dt)?;
        self.nonlinear_substep(u, 0.5 * dt)
    }

    pub fn diagnostics(&self, t: f64, u: &GridFunction) -> Result<Diagnostics, EvolutionError> {
        let grid = self.grid;
        let family = &self.config.family;
        Ok(Diagnostics {
            t,
            mass: grid.mass(u),
            h1: grid.h1_norm(u),
            energy: energy::exact_energy(grid, family, u),
            energy_m: energy::regularized_energy(grid, family, self.config.m, u, self.yosida.as_ref())?,
            linf: u.max_modulus(),
            luxemburg: matches!(family, NonlinearityFamily::Logarithmic).then(|| grid.luxemburg_norm(u)),
        })
    }
}

/// `n` RK4 stages of `u' = i J g(J u)` over `τ`.
pub fn yosida_rk4(
    op: &YosidaOperator<'_>,
    nl: &Nonlinearity,
    u: &mut GridFunction,
    tau: f64,
    n: usize,
) -> Result<(), ResolventError> {
    let i = Complex64::i();
    let rhs = |v: &GridFunction| -> Result<GridFunction, ResolventError> {
        let w = op.apply(v)?;
        let g = w.map(|z| nl.eval(z).conservative);
        Ok(&op.apply(&g)? * i)
    };
    let h = tau / n as f64;
    for _ in 0..n {
        let k1 = rhs(u)?;
        let mut y = u.clone();
        y.axpy(Complex64::new(0.5 * h, 0.0), &k1);
        let k2 = rhs(&y)?;
        let mut y = u.clone();
        y.axpy(Complex64::new(0.5 * h, 0.0), &k2);
        let k3 = rhs(&y)?;
        let mut y = u.clone();
        y.axpy(Complex64::new(h, 0.0), &k3);
        let k4 = rhs(&y)?;
        u.axpy(Complex64::new(h / 6.0, 0.0), &k1);
        u.axpy(Complex64::new(h / 3.0, 0.0), &k2);
        u.axpy(Complex64::new(h / 3.0, 0.0), &k3);
        u.axpy(Complex64::new(h / 6.0, 0.0), &k4);
    }
    Ok(())
}

/// Run `config` from `phi` to `t_final`.
pub fn evolve(grid: &Grid, config: &SchemeConfig, phi: &GridFunction) -> Result<TrajectoryRecord, EvolutionError> {
    grid.check(phi)?;
    let mut ev = Evolver::new(grid, *config)?;
    let steps = config.steps();
    let dt = config.effective_dt();
    let mut u = phi.clone();
    let mut record = TrajectoryRecord {
        dt,
        steps,
        completed: 0,
        diagnostics: Vec::new(),
        fields: Vec::new(),
        snapshots: Vec::new(),
        final_state: phi.clone(),
        max_substeps: 1,
    };
    let push = |record: &mut TrajectoryRecord, ev: &Evolver<'_>, step: usize, u: &GridFunction| {
        let t = step as f64 * dt;
        let d = ev.diagnostics(t, u)?;
        if config.snapshot_stride > 0 && record.diagnostics.len().is_multiple_of(config.snapshot_stride) {
            record.snapshots.push(Snapshot { step, time: t, field: u.clone() });
        }
        record.diagnostics.push(d);
        record.fields.push(u.clone());
        Ok::<(), EvolutionError>(())
    };
    push(&mut record, &ev, 0, &u)?;
    for step in 1..=steps {
        let last_good = u.clone();
        ev.step(&mut u, dt)?;
        if !u.is_finite() {
            record.completed = step - 1;
            record.final_state = last_good;
            record.max_substeps = ev.max_substeps;
            return Err(EvolutionError::NonFinite { step, time: step as f64 * dt, partial: Box::new(record) });
        }
        if step % config.diagnostic_stride == 0 || step == steps {
            push(&mut record, &ev, step, &u)?;
        }
    }
    record.completed = steps;
    record.final_state = u;
    record.max_substeps = ev.max_substeps;
    Ok(record)
}
