//! Exact two-sided evaluations of the pointwise inequalities satisfied by the
//! nonlinearities.
//!
//! Where a direct evaluation would lose all digits to cancellation the lhs is
//! computed from an algebraically equivalent closed form; the tests compare
//! both routes.

use num_complex::Complex64;
use serde::Serialize;

use super::constants::FrozenConstants;
use super::profile::{BaseProfile, RadialProfile};
use super::TruncationLevel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InequalityKind {
    /// `|g_m(u) − g_m(v)| ≤ C(1 + |u|² + |v|²)|u − v|` for a truncated power law.
    PowerLipschitz { lambda: f64, sigma: f64, m: TruncationLevel },
    /// `|Im[(g(u) − g(v)) conj(u − v)]| ≤ 2|u − v|²` for `g = z log|z|²`.
    LogImaginary,
    /// Same form for the regularized small-amplitude part `a_m`.
    LogRegularizedA { m: TruncationLevel },
    /// Same form for the regularized large-amplitude part `b_m`.
    LogRegularizedB { m: TruncationLevel },
    /// `Re[(f(u) − f(v)) conj(u − v)] ≥ 0` for the truncated damping profile.
    DampingMonotone { alpha: f64, m: TruncationLevel },
    /// `|u/|u|^α − v/|v|^α| ≤ C|u − v|^{1−α}`.
    DampingHolder { alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleOutcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl OracleOutcome {
    fn upper(lhs: f64, rhs: f64) -> Self {
        OracleOutcome { lhs, rhs, holds: lhs <= rhs }
    }

    /// `rhs - lhs` for upper bounds, `lhs - rhs` for the sign condition.
    pub fn margin(&self, kind: &InequalityKind) -> f64 {
        match kind {
            InequalityKind::DampingMonotone { .. } => self.lhs - self.rhs,
            _ => self.rhs - self.lhs,
        }
    }
}

/// `Im[(u h(|u|) − v h(|v|)) conj(u − v)] = (h(|v|) − h(|u|)) Im(u conj v)`.
pub fn gauge_imaginary_part(rate: impl Fn(f64) -> f64, u: Complex64, v: Complex64) -> f64 {
    (rate(v.norm()) - rate(u.norm())) * (u * v.conj()).im
}

/// `Re[(f(u) − f(v)) conj(u − v)]` for `f(z) = (z/|z|) r(|z|)`, written as the
/// sum of two nonnegative terms when `r` is nondecreasing and nonnegative.
pub fn gauge_monotone_part(profile: impl Fn(f64) -> f64, u: Complex64, v: Complex64) -> f64 {
    let (r1, r2) = (u.norm(), v.norm());
    let (f1, f2) = (profile(r1), profile(r2));
    if r1 == 0.0 || r2 == 0.0 {
        return f1 * r1 + f2 * r2;
    }
    let phase_gap = (u / r1 - v / r2).norm_sqr();
    (f1 - f2) * (r1 - r2) + (f1 * r2 + f2 * r1) * 0.5 * phase_gap
}

fn log_rate(rho: f64) -> f64 {
    if rho <= super::log_split::TINY {
        0.0
    } else {
        (rho * rho).ln()
    }
}

/// Lipschitz constant for `λ|z|^σ z` in the form `C(1 + |u|² + |v|²)`.
///
/// For `σ = 2` the derivative norm `3|λ||z|²` averages along the segment to at
/// most `(3/2)|λ|(|u|² + |v|²)` by convexity of `|·|²`.
pub fn power_lipschitz_constant(lambda: f64, sigma: f64) -> f64 {
    if sigma == 2.0 {
        1.5 * lambda.abs()
    } else {
        (sigma + 1.0) * lambda.abs()
    }
}

pub fn inequality_oracle(
    kind: &InequalityKind,
    constants: &FrozenConstants,
    u: Complex64,
    v: Complex64,
) -> OracleOutcome {
    let gap = (u - v).norm();
    match *kind {
        InequalityKind::PowerLipschitz { lambda, sigma, m } => {
            let p = RadialProfile::above(BaseProfile::Power { lambda, sigma }, m.value());
            let lhs = (u * p.rate(u.norm()) - v * p.rate(v.norm())).norm();
            let c = power_lipschitz_constant(lambda, sigma);
            OracleOutcome::upper(lhs, c * (1.0 + u.norm_sqr() + v.norm_sqr()) * gap)
        }
        InequalityKind::LogImaginary => {
            if u == v {
                return OracleOutcome { lhs: 0.0, rhs: 0.0, holds: true };
            }
            let lhs = gauge_imaginary_part(log_rate, u, v).abs();
            OracleOutcome::upper(lhs, 2.0 * gap * gap)
        }
        InequalityKind::LogRegularizedA { m } => {
            if u == v {
                return OracleOutcome { lhs: 0.0, rhs: 0.0, holds: true };
            }
            let p = RadialProfile::below(BaseProfile::LogA, 1.0 / m.value());
            let lhs = gauge_imaginary_part(|r| p.rate(r), u, v).abs();
            OracleOutcome::upper(lhs, constants.log_regularized_a * gap * gap)
        }
        InequalityKind::LogRegularizedB { m } => {
            if u == v {
                return OracleOutcome { lhs: 0.0, rhs: 0.0, holds: true };
            }
            let p = RadialProfile::above(BaseProfile::LogB, m.value());
            let lhs = gauge_imaginary_part(|r| p.rate(r), u, v).abs();
            OracleOutcome::upper(lhs, constants.log_regularized_b * gap * gap)
        }
        InequalityKind::DampingMonotone { alpha, m } => {
            let p = RadialProfile::below(BaseProfile::Root { alpha }, 1.0 / m.value());
            let lhs = gauge_monotone_part(|r| p.value(r), u, v);
            OracleOutcome { lhs, rhs: 0.0, holds: lhs >= 0.0 }
        }
        InequalityKind::DampingHolder { alpha } => {
            if u == v {
                return OracleOutcome { lhs: 0.0, rhs: 0.0, holds: true };
            }
            let f = |z: Complex64| {
                let r = z.norm();
                if r <= super::log_split::TINY {
                    Complex64::new(0.0, 0.0)
                } else {
                    z * r.powf(-alpha)
                }
            };
            let lhs = (f(u) - f(v)).norm();
            let c = constants.damping_holder(alpha);
            OracleOutcome::upper(lhs, c * gap.powf(1.0 - alpha))
        }
    }
}
