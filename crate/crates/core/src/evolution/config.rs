use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::nonlinearity::{NonlinearityFamily, TruncationLevel};

use super::EvolutionError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `i u_t + Δu + g_m(u) = 0` with the power law truncated above `m`.
    TruncatedDirect,
    /// `i u_t + Δu + J_m g(J_m u) = 0`.
    YosidaRegularized,
    /// `i u_t + Δu − a_m(u) + b_m(u) = 0`.
    LogSplitScheme,
    /// `i u_t + Δu + i g_m(u) = 0` with the damping truncated below `1/m`.
    DampedTruncated,
    /// Truncated power law plus truncated damping.
    PowerPlusDamping,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinearSubstep {
    #[default]
    SpectralExact,
    CrankNicolson { tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub family: NonlinearityFamily,
    pub m: TruncationLevel,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub linear_substep: LinearSubstep,
    /// Keep a field snapshot every this many recorded diagnostics; 0 keeps none.
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Record diagnostics every this many steps (the first and last step are
    /// always recorded).
    #[serde(default = "one")]
    pub diagnostic_stride: usize,
    #[serde(default)]
    pub allow_supercritical: bool,
}

fn one() -> usize {
    1
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, family: NonlinearityFamily, m: TruncationLevel, dt: f64, t_final: f64) -> Self {
        SchemeConfig {
            scheme,
            family,
            m,
            dt,
            t_final,
            linear_substep: LinearSubstep::SpectralExact,
            snapshot_stride: 0,
            diagnostic_stride: 1,
            allow_supercritical: false,
        }
    }

    pub fn with_level(mut self, m: TruncationLevel) -> Self {
        self.m = m;
        self
    }

    /// Number of steps; the effective step is `t_final / steps`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_final / self.steps() as f64
    }

    pub fn is_hamiltonian(&self) -> bool {
        !self.family.is_dissipative()
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), EvolutionError> {
        let bad = |msg: String| Err(EvolutionError::Config(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.dt > self.t_final {
            return bad(format!("dt = {} exceeds t_final = {}", self.dt, self.t_final));
        }
        if self.diagnostic_stride == 0 {
            return bad("diagnostic_stride must be at least 1".into());
        }
        if let LinearSubstep::SpectralExact = self.linear_substep {
            if !grid.is_full_rectangle() {
                return bad("spectral linear substep needs a full-rectangle domain".into());
            }
        }
        if let LinearSubstep::CrankNicolson { tol } = self.linear_substep {
            if !(tol > 0.0 && tol <= 1e-6) {
                return bad(format!("Crank-Nicolson tolerance {tol} outside (0, 1e-6]"));
            }
        }
        self.family
            .validate(self.allow_supercritical)
            .map_err(|e| EvolutionError::Config(e.to_string()))?;
        let compatible = matches!(
            (self.scheme, self.family),
            (Scheme::TruncatedDirect, NonlinearityFamily::PowerLocal { .. })
                | (Scheme::YosidaRegularized, NonlinearityFamily::PowerLocal { .. })
                | (Scheme::LogSplitScheme, NonlinearityFamily::Logarithmic)
                | (Scheme::DampedTruncated, NonlinearityFamily::Damping { .. })
                | (Scheme::PowerPlusDamping, NonlinearityFamily::PowerPlusDamping { .. })
        );
        if !compatible {
            return bad(format!("scheme {:?} cannot evolve {:?}", self.scheme, self.family));
        }
        if self.scheme == Scheme::YosidaRegularized && !self.m.is_finite() {
            return bad("Yosida regularization needs a finite level".into());
        }
        Ok(())
    }
}
