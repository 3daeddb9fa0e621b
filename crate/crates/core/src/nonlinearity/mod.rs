//! Nonlinearity families, their truncations and antiderivatives.
//!
//! Every family is written as `N(z) = c(z) + i d(z)` where `c` is the
//! conservative (Hamiltonian) part and `d` the dissipative part, both of gauge
//! form `z · h(|z|)`. The equation evolved is `i u_t + Δu + N(u) = 0`.

pub mod constants;
pub mod log_split;
pub mod oracle;
pub mod profile;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use profile::{BaseProfile, RadialProfile};

#[derive(Debug, Error, PartialEq)]
pub enum NonlinearityError {
    #[error("truncation level must be >= 1, got {0}")]
    Level(f64),
    #[error("growth exponent sigma = {0} outside [0, 2]; set allow_supercritical to override")]
    Sigma(f64),
    #[error("damping exponent alpha = {0} outside (0, 1)")]
    Alpha(f64),
    #[error("non-finite coefficient")]
    Coefficient,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityFamily {
    /// `λ |z|^σ z`
    PowerLocal { lambda: f64, sigma: f64 },
    /// `z log |z|²`
    Logarithmic,
    /// `z / |z|^α`, entering the equation multiplied by `i`
    Damping { alpha: f64 },
    /// `λ |z|^σ z + i z / |z|^α`
    PowerPlusDamping { lambda: f64, sigma: f64, alpha: f64 },
}

/// Truncation level `m ≥ 1`; `∞` means untruncated.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TruncationLevel(f64);

impl TruncationLevel {
    pub const NONE: TruncationLevel = TruncationLevel(f64::INFINITY);

    pub fn new(m: f64) -> Result<Self, NonlinearityError> {
        if m.is_nan() || m < 1.0 {
            return Err(NonlinearityError::Level(m));
        }
        Ok(TruncationLevel(m))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    fn inverse(self) -> f64 {
        1.0 / self.0
    }
}

/// Conservative and dissipative parts of a nonlinearity evaluated at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonlinearValue {
    pub conservative: Complex64,
    pub dissipative: Complex64,
}

impl NonlinearValue {
    /// `c(z) + i d(z)`, the term added to `i u_t + Δu`.
    pub fn equation_term(&self) -> Complex64 {
        self.conservative + Complex64::i() * self.dissipative
    }
}

impl NonlinearityFamily {
    pub fn validate(&self, allow_supercritical: bool) -> Result<(), NonlinearityError> {
        let check_sigma = |lambda: f64, sigma: f64| {
            if !lambda.is_finite() || !sigma.is_finite() {
                return Err(NonlinearityError::Coefficient);
            }
            if sigma < 0.0 || (sigma > 2.0 && !allow_supercritical) {
                return Err(NonlinearityError::Sigma(sigma));
            }
            Ok(())
        };
        let check_alpha = |alpha: f64| {
            if alpha > 0.0 && alpha < 1.0 {
                Ok(())
            } else {
                Err(NonlinearityError::Alpha(alpha))
            }
        };
        match *self {
            NonlinearityFamily::PowerLocal { lambda, sigma } => check_sigma(lambda, sigma),
            NonlinearityFamily::Logarithmic => Ok(()),
            NonlinearityFamily::Damping { alpha } => check_alpha(alpha),
            NonlinearityFamily::PowerPlusDamping { lambda, sigma, alpha } => {
                check_sigma(lambda, sigma)?;
                check_alpha(alpha)
            }
        }
    }

    pub fn is_dissipative(&self) -> bool {
        matches!(self, NonlinearityFamily::Damping { .. } | NonlinearityFamily::PowerPlusDamping { .. })
    }

    pub fn damping_exponent(&self) -> Option<f64> {
        match *self {
            NonlinearityFamily::Damping { alpha }
            | NonlinearityFamily::PowerPlusDamping { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    /// Profiles of the family at truncation level `m`.
    pub fn at_level(&self, m: TruncationLevel) -> Nonlinearity {
        let mut conservative = Vec::new();
        let mut dissipative = None;
        match *self {
            NonlinearityFamily::PowerLocal { lambda, sigma } => {
                conservative.push((1.0, RadialProfile::above(BaseProfile::Power { lambda, sigma }, m.0)));
            }
            NonlinearityFamily::Logarithmic => {
                conservative.push((-1.0, RadialProfile::below(BaseProfile::LogA, m.inverse())));
                conservative.push((1.0, RadialProfile::above(BaseProfile::LogB, m.0)));
            }
            NonlinearityFamily::Damping { alpha } => {
                dissipative = Some(RadialProfile::below(BaseProfile::Root { alpha }, m.inverse()));
            }
            NonlinearityFamily::PowerPlusDamping { lambda, sigma, alpha } => {
                conservative.push((1.0, RadialProfile::above(BaseProfile::Power { lambda, sigma }, m.0)));
                dissipative = Some(RadialProfile::below(BaseProfile::Root { alpha }, m.inverse()));
            }
        }
        Nonlinearity { family: *self, level: m, conservative, dissipative }
    }
}

/// A family frozen at one truncation level.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonlinearity {
    pub family: NonlinearityFamily,
    pub level: TruncationLevel,
    /// Signed sum of gauge profiles forming the conservative part.
    pub conservative: Vec<(f64, RadialProfile)>,
    pub dissipative: Option<RadialProfile>,
}

impl Nonlinearity {
    /// Phase rotation rate `c(z)/z` as a function of `|z|`.
    pub fn conservative_rate(&self, rho: f64) -> f64 {
        self.conservative.iter().map(|(c, p)| c * p.rate(rho)).sum()
    }

    /// Radial profile of the conservative part.
    pub fn conservative_profile(&self, rho: f64) -> f64 {
        self.conservative.iter().map(|(c, p)| c * p.value(rho)).sum()
    }

    /// `∫₀^ρ` of the conservative profile (the `G` integrand).
    pub fn conservative_primitive(&self, rho: f64) -> f64 {
        self.conservative.iter().map(|(c, p)| c * p.primitive(rho)).sum()
    }

    pub fn eval(&self, z: Complex64) -> NonlinearValue {
        let rho = z.norm();
        if rho <= log_split::TINY {
            let zero = Complex64::new(0.0, 0.0);
            return NonlinearValue { conservative: zero, dissipative: zero };
        }
        let conservative = z * self.conservative_rate(rho);
        let dissipative = match &self.dissipative {
            Some(p) => z * p.rate(rho),
            None => Complex64::new(0.0, 0.0),
        };
        NonlinearValue { conservative, dissipative }
    }
}

/// `g(z)` for the untruncated family.
pub fn eval_g(family: &NonlinearityFamily, z: Complex64) -> NonlinearValue {
    family.at_level(TruncationLevel::NONE).eval(z)
}

/// `g_m(z)`.
pub fn eval_g_trunc(family: &NonlinearityFamily, m: TruncationLevel, z: Complex64) -> NonlinearValue {
    family.at_level(m).eval(z)
}

/// `(a_m(z), b_m(z))` for the logarithmic split; `g_m = -a_m + b_m`.
pub fn log_parts_trunc(m: TruncationLevel, z: Complex64) -> (Complex64, Complex64) {
    let rho = z.norm();
    if rho <= log_split::TINY {
        return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    let a = RadialProfile::below(BaseProfile::LogA, m.inverse());
    let b = RadialProfile::above(BaseProfile::LogB, m.value());
    (z * a.rate(rho), z * b.rate(rho))
}

/// Primitive of the conservative profile, or of the dissipative profile for
/// pure damping.
pub fn antiderivative(family: &NonlinearityFamily, m: TruncationLevel, rho: f64) -> f64 {
    let nl = family.at_level(m);
    match (&nl.dissipative, nl.conservative.is_empty()) {
        (Some(p), true) => p.primitive(rho),
        _ => nl.conservative_primitive(rho),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const POWER: NonlinearityFamily = NonlinearityFamily::PowerLocal { lambda: 1.0, sigma: 2.0 };
    const DAMP: NonlinearityFamily = NonlinearityFamily::Damping { alpha: 0.5 };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pointwise_examples() {
        assert_eq!(eval_g(&POWER, c(2.0, 0.0)).conservative, c(8.0, 0.0));
        assert_eq!(eval_g(&NonlinearityFamily::Logarithmic, c(0.0, 0.0)).conservative, c(0.0, 0.0));
        let d = eval_g(&DAMP, c(4.0, 0.0));
        assert_eq!(d.dissipative, c(2.0, 0.0));
        assert_eq!(d.equation_term(), c(0.0, 2.0));
    }

    #[test]
    fn truncated_examples() {
        let m2 = TruncationLevel::new(2.0).unwrap();
        assert_eq!(eval_g_trunc(&POWER, m2, c(3.0, 0.0)).conservative, c(12.0, 0.0));

        let m4 = TruncationLevel::new(4.0).unwrap();
        let d = eval_g_trunc(&DAMP, m4, c(0.1, 0.0)).dissipative;
        assert!((d - c(0.2, 0.0)).norm() < 1e-15);

        let me4 = TruncationLevel::new(4f64.exp()).unwrap();
        for z in [c(0.01, 0.005), c(-(-4.0f64).exp(), 0.0), c(1e-9, -3e-9)] {
            let (a, _) = log_parts_trunc(me4, z);
            assert!((a - 8.0 * z).norm() <= 1e-13 * z.norm(), "{z}");
        }
    }

    #[test]
    fn antiderivative_examples() {
        assert_eq!(antiderivative(&POWER, TruncationLevel::NONE, 2.0), 4.0);
        assert_eq!(antiderivative(&POWER, TruncationLevel::new(2.0).unwrap(), 3.0), 14.0);
    }

    #[test]
    fn log_split_recombines() {
        let m = TruncationLevel::new(1e3).unwrap();
        for z in [c(1e-5, 0.0), c(0.03, 0.04), c(5.0, -1.0), c(2e3, 7.0)] {
            let (a, b) = log_parts_trunc(m, z);
            let g = eval_g_trunc(&NonlinearityFamily::Logarithmic, m, z).conservative;
            assert!((g - (b - a)).norm() < 1e-12 * g.norm().max(1e-300));
        }
        // untruncated: g(z) = z log|z|²
        for z in [c(0.3, 0.1), c(1e-4, 1e-4), c(10.0, 0.0)] {
            let g = eval_g(&NonlinearityFamily::Logarithmic, z).conservative;
            assert!((g - z * z.norm_sqr().ln()).norm() < 1e-13 * g.norm());
        }
    }

    #[test]
    fn truncation_gaps_follow_sup_bounds() {
        let k = 5.0;
        for m in [1.0, 2.0, 5.0, 8.0, 64.0] {
            let nl = POWER.at_level(TruncationLevel::new(m).unwrap());
            let gap = nl.conservative[0].1.truncation_gap(k, 4000);
            if m >= k {
                assert_eq!(gap, 0.0);
            }
        }
        for m in [2.0, 4.0, 16.0, 256.0, 4096.0] {
            let alpha = 0.5f64;
            let nl = DAMP.at_level(TruncationLevel::new(m).unwrap());
            let p = nl.dissipative.unwrap();
            assert!(p.truncation_gap(1.0, 20000) <= 2.0 * m.powf(-(1.0 - alpha)));
        }
        for m in [32.0f64, 1024.0, 32768.0] {
            let a = RadialProfile::below(BaseProfile::LogA, 1.0 / m);
            assert!(a.truncation_gap(1.0, 200_000) <= 4.0 * m.ln() / m);
        }
    }

    #[test]
    fn validation() {
        assert!(NonlinearityFamily::PowerLocal { lambda: 1.0, sigma: 2.5 }.validate(false).is_err());
        assert!(NonlinearityFamily::PowerLocal { lambda: 1.0, sigma: 2.5 }.validate(true).is_ok());
        assert_eq!(
            NonlinearityFamily::Damping { alpha: 1.0 }.validate(false),
            Err(NonlinearityError::Alpha(1.0))
        );
        assert!(TruncationLevel::new(0.5).is_err());
    }

    fn families() -> Vec<NonlinearityFamily> {
        vec![
            POWER,
            NonlinearityFamily::PowerLocal { lambda: -0.7, sigma: 1.3 },
            NonlinearityFamily::Logarithmic,
            DAMP,
            NonlinearityFamily::PowerPlusDamping { lambda: 1.0, sigma: 1.0, alpha: 0.3 },
        ]
    }

    proptest! {
        #[test]
        fn gauge_equivariance(re in -50.0f64..50.0, im in -50.0f64..50.0, theta in 0.0f64..6.3, m in 1.0f64..100.0) {
            let z = c(re, im);
            let rot = Complex64::from_polar(1.0, theta);
            for fam in families() {
                for level in [TruncationLevel::NONE, TruncationLevel::new(m).unwrap()] {
                    let nl = fam.at_level(level);
                    let a = nl.eval(rot * z);
                    let b = nl.eval(z);
                    let scale = b.conservative.norm() + b.dissipative.norm();
                    prop_assert!((a.conservative - rot * b.conservative).norm() <= 1e-12 * scale.max(1e-300));
                    prop_assert!((a.dissipative - rot * b.dissipative).norm() <= 1e-12 * scale.max(1e-300));
                }
            }
        }

        #[test]
        fn truncation_continuous_at_threshold(m in 1.0f64..1e4) {
            let level = TruncationLevel::new(m).unwrap();
            for fam in families() {
                let nl = fam.at_level(level);
                for t in [m, 1.0 / m] {
                    let lo = nl.eval(c(t * (1.0 - 1e-12), 0.0)).equation_term();
                    let hi = nl.eval(c(t * (1.0 + 1e-12), 0.0)).equation_term();
                    prop_assert!((lo - hi).norm() <= 1e-9 * lo.norm().max(1e-12));
                }
            }
        }

        #[test]
        fn antiderivative_derivative_is_profile(rho in 1e-4f64..20.0, m in 2.0f64..50.0) {
            let level = TruncationLevel::new(m).unwrap();
            for fam in families() {
                let nl = fam.at_level(level);
                let near = [m, 1.0 / m, log_split::JUNCTION].iter().any(|t| (rho / t - 1.0).abs() < 1e-4);
                if near { continue; }
                let h = 1e-6 * rho;
                let fd = (antiderivative(&fam, level, rho + h) - antiderivative(&fam, level, rho - h)) / (2.0 * h);
                let exact = match (&nl.dissipative, nl.conservative.is_empty()) {
                    (Some(p), true) => p.value(rho),
                    _ => nl.conservative_profile(rho),
                };
                prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(rho * 1e-2), "{fam:?} {rho}: {fd} vs {exact}");
            }
        }
    }
}
