//! Exponent sweeps in `L^{2p′}` and continuous-dependence experiments.

use serde::Serialize;

use crate::evolution::{evolve, EvolutionError, SchemeConfig};
use crate::grid::{Grid, GridError, GridFunction};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentEntry {
    pub p: f64,
    /// `‖u − v‖_{2p′}` with `1/(2p′) = 1/2 − 1/(2p)`.
    pub distance: f64,
    /// `‖u − v‖₂^{1−3/(2p)} ‖u − v‖₆^{3/(2p)}`
    pub interpolation_bound: f64,
    /// `‖v‖_{2p} / (√p ‖v‖_{H¹})`
    pub sqrt_p_ratio: f64,
    /// `p · ‖u − v‖₂^{2(1−3/(2p))}`
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct YudovichReport {
    pub entries: Vec<ExponentEntry>,
    /// Exponent minimizing the envelope (`None` when `u = v`).
    pub best_p: Option<f64>,
}

pub fn yudovich_probe(grid: &Grid, u: &GridFunction, v: &GridFunction, ps: &[f64]) -> Result<YudovichReport, GridError> {
    grid.check(u)?;
    grid.check(v)?;
    let w = u - v;
    let d2 = grid.l2_norm(&w);
    let d6 = grid.lp_norm(&w, 6.0)?;
    let h1 = grid.h1_norm(v);
    let mut entries = Vec::with_capacity(ps.len());
    for &p in ps {
        if !(p > 1.5) {
            return Err(GridError::Exponent(p));
        }
        let theta = 3.0 / (2.0 * p);
        let dual = 2.0 * p / (p - 1.0);
        let sqrt_p_ratio = if h1 == 0.0 { 0.0 } else { grid.lp_norm(v, 2.0 * p)? / (p.sqrt() * h1) };
        entries.push(ExponentEntry {
            p,
            distance: grid.lp_norm(&w, dual)?,
            interpolation_bound: d2.powf(1.0 - theta) * d6.powf(theta),
            sqrt_p_ratio,
            envelope: p * d2.powf(2.0 * (1.0 - theta)),
        });
    }
    let best_p = if d2 == 0.0 {
        None
    } else {
        entries.iter().min_by(|a, b| a.envelope.total_cmp(&b.envelope)).map(|e| e.p)
    };
    Ok(YudovichReport { entries, best_p })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DependenceEntry {
    pub scale: f64,
    pub l2: f64,
    pub h1: f64,
    /// `l2 / scale`
    pub amplification: f64,
    /// Smallest `C` with `‖u(t) − u_s(t)‖₂ ≤ s e^{Ct}` at every recorded time.
    pub growth_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DependenceReport {
    pub entries: Vec<DependenceEntry>,
    /// Sup distances decrease with the scale.
    pub monotone: bool,
}

/// Compare runs from `φ` and `φ + s δφ` for each scale `s`.
pub fn dependence_probe(
    grid: &Grid,
    config: &SchemeConfig,
    phi: &GridFunction,
    direction: &GridFunction,
    scales: &[f64],
) -> Result<DependenceReport, EvolutionError> {
    let base = evolve(grid, config, phi)?;
    let mut entries = Vec::with_capacity(scales.len());
    for &s in scales {
        let mut perturbed = phi.clone();
        perturbed.axpy(num_complex::Complex64::new(s, 0.0), direction);
        let run = evolve(grid, config, &perturbed)?;
        let mut l2 = 0.0f64;
        let mut h1 = 0.0f64;
        let mut growth = f64::NEG_INFINITY;
        for ((a, b), d) in base.fields.iter().zip(&run.fields).zip(&base.diagnostics) {
            let diff = a - b;
            let dl2 = grid.l2_norm(&diff);
            l2 = l2.max(dl2);
            h1 = h1.max(grid.h1_norm(&diff));
            if s > 0.0 && d.t > 0.0 && dl2 > 0.0 {
                growth = growth.max((dl2 / s).ln() / d.t);
            }
        }
        entries.push(DependenceEntry {
            scale: s,
            l2,
            h1,
            amplification: if s > 0.0 { l2 / s } else { 0.0 },
            growth_rate: if growth.is_finite() { growth } else { 0.0 },
        });
    }
    let mut order: Vec<&DependenceEntry> = entries.iter().collect();
    order.sort_by(|a, b| b.scale.total_cmp(&a.scale));
    let monotone = order.windows(2).all(|w| w[1].l2 <= w[0].l2);
    Ok(DependenceReport { entries, monotone })
}
