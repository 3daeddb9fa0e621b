//! Discrete quadrature norms on a [`Grid`].
//!
//! `‖u‖_p = (Σ |u_i|^p · Δx^N)^{1/p}`, the sup norm is a plain maximum, and the
//! gradient uses forward differences over every lattice edge touching the
//! domain (exterior endpoints carry zero). With that convention
//! `‖∇u‖² = -⟨Δu, u⟩` holds exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, GridError, GridFunction};
use crate::nonlinearity::log_split::orlicz_weight;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    /// `L^p` for `p ∈ [1, ∞]`; `f64::INFINITY` selects the max norm.
    Lp(f64),
    H1,
    H1Seminorm,
}

const LUXEMBURG_TOL: f64 = 1e-10;

impl Grid {
    pub fn norm(&self, u: &GridFunction, kind: NormKind) -> Result<f64, GridError> {
        self.check(u)?;
        match kind {
            NormKind::Lp(p) => self.lp_norm(u, p),
            NormKind::H1 => Ok(self.h1_norm(u)),
            NormKind::H1Seminorm => Ok(self.gradient_norm_sq(u).sqrt()),
        }
    }

    pub fn lp_norm(&self, u: &GridFunction, p: f64) -> Result<f64, GridError> {
        if p.is_nan() || p < 1.0 {
            return Err(GridError::Exponent(p));
        }
        let max = u.max_modulus();
        if p.is_infinite() || max == 0.0 {
            return Ok(max);
        }
        // scale by the max so large p cannot overflow
        let sum: f64 = u.values().iter().map(|z| (z.norm() / max).powf(p)).sum();
        Ok(max * (sum * self.cell_measure()).powf(1.0 / p))
    }

    pub fn l2_norm(&self, u: &GridFunction) -> f64 {
        self.mass(u).sqrt()
    }

    /// `M(u) = ∫ |u|²`.
    pub fn mass(&self, u: &GridFunction) -> f64 {
        u.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_measure()
    }

    /// `‖∇u‖²`.
    pub fn gradient_norm_sq(&self, u: &GridFunction) -> f64 {
        let mut acc = 0.0;
        self.for_each_gradient(u.values(), |sq| acc += sq);
        acc * self.cell_measure()
    }

    pub fn h1_norm(&self, u: &GridFunction) -> f64 {
        (self.mass(u) + self.gradient_norm_sq(u)).sqrt()
    }

    /// `(‖u‖_p^p + ‖ |∇u| ‖_p^p)^{1/p}`; for `p = 2` this is [`Grid::h1_norm`].
    pub fn w1p_norm(&self, u: &GridFunction, p: f64) -> Result<f64, GridError> {
        if p.is_nan() || p < 1.0 || p.is_infinite() {
            return Err(GridError::Exponent(p));
        }
        let mut grad = 0.0;
        self.for_each_gradient(u.values(), |sq| grad += sq.powf(p / 2.0));
        let own: f64 = u.values().iter().map(|z| z.norm().powf(p)).sum();
        Ok(((own + grad) * self.cell_measure()).powf(1.0 / p))
    }

    /// `⟨u, v⟩ = Σ u_i conj(v_i) Δx^N`.
    pub fn inner(&self, u: &GridFunction, v: &GridFunction) -> Complex64 {
        u.values().iter().zip(v.values()).map(|(a, b)| a * b.conj()).sum::<Complex64>()
            * self.cell_measure()
    }

    /// `∫ A(|u| / k)` for the Orlicz weight `A`.
    pub fn orlicz_modular(&self, u: &GridFunction, k: f64) -> f64 {
        u.values().iter().map(|z| orlicz_weight(z.norm() / k)).sum::<f64>() * self.cell_measure()
    }

    /// Luxemburg norm `inf { k > 0 : ∫ A(|u|/k) ≤ 1 }` by bisection on the
    /// decreasing map `k ↦ ∫ A(|u|/k)`.
    pub fn luxemburg_norm(&self, u: &GridFunction) -> f64 {
        let max = u.max_modulus();
        if max == 0.0 {
            return 0.0;
        }
        let l1: f64 = u.values().iter().map(|z| z.norm()).sum::<f64>() * self.cell_measure();
        let mut lo = (l1 / self.measure()).min(max);
        let mut hi = max * 3f64.exp();
        while self.orlicz_modular(u, lo) <= 1.0 {
            lo *= 0.5;
        }
        while self.orlicz_modular(u, hi) > 1.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.orlicz_modular(u, mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi && self.orlicz_modular(u, hi) >= 1.0 - LUXEMBURG_TOL {
                break;
            }
        }
        hi
    }
}
