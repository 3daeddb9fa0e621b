//! Splitting the cubic nonlinearity into a bounded-amplitude part and a tail,
//! `g₁ = θ(|u|) g(u)`, `g₂ = (1 − θ(|u|)) g(u)`, with `θ` the smooth cutoff on
//! moduli `[1, 2]`.

use num_complex::Complex64;
use serde::Serialize;

use crate::grid::{smooth_cutoff, Grid, GridError, GridFunction};

/// Exponent pair `(r, q)` with `1/r = 2/q + 1/2`.
pub const SPLIT_Q: f64 = 8.0;
pub const SPLIT_R: f64 = 4.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitReport {
    /// `‖g₁(u)‖_{H¹} / ‖u‖_{H¹}`
    pub bounded_ratio: f64,
    /// `‖g₂(u)‖_{W^{1,r}} / (‖u‖_{L^q}² ‖u‖_{H¹})`
    pub tail_ratio: f64,
    pub tail_vanishes: bool,
    pub r: f64,
    pub q: f64,
}

pub fn split_parts(u: &GridFunction) -> (GridFunction, GridFunction) {
    let mut low = Vec::with_capacity(u.len());
    let mut high = Vec::with_capacity(u.len());
    for &z in u.values() {
        let rho2 = z.norm_sqr();
        let g = z * rho2;
        let theta = smooth_cutoff(rho2.sqrt());
        low.push(g * theta);
        high.push(g * (1.0 - theta));
    }
    (GridFunction::from_vec(low), GridFunction::from_vec(high))
}

pub fn cutoff_split_check(grid: &Grid, u: &GridFunction) -> Result<SplitReport, GridError> {
    grid.check(u)?;
    let (low, high) = split_parts(u);
    let tail_vanishes = high.values().iter().all(|z| *z == Complex64::new(0.0, 0.0));
    let h1 = grid.h1_norm(u);
    let bounded_ratio = if h1 == 0.0 { 0.0 } else { grid.h1_norm(&low) / h1 };
    let lq = grid.lp_norm(u, SPLIT_Q)?;
    let denom = lq * lq * h1;
    let tail_ratio = if denom == 0.0 { 0.0 } else { grid.w1p_norm(&high, SPLIT_R)? / denom };
    Ok(SplitReport { bounded_ratio, tail_ratio, tail_vanishes, r: SPLIT_R, q: SPLIT_Q })
}
