//! Real radial profiles `r(ρ)` and their truncations.
//!
//! A gauge nonlinearity is `g(z) = z · h(|z|)` with `h(ρ) = r(ρ)/ρ`, so all
//! evaluation goes through the rate `h`. Truncation replaces the profile by
//! its secant line through the origin below a lower threshold and/or above an
//! upper threshold; ties go to the secant branch.

use serde::{Deserialize, Serialize};

use super::log_split::{self, TINY};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BaseProfile {
    /// `λ ρ^{σ+1}`
    Power { lambda: f64, sigma: f64 },
    /// `ρ^{1-α}`
    Root { alpha: f64 },
    /// `ρ log ρ²`
    Log,
    /// `a(ρ) = A(ρ)/ρ`
    LogA,
    /// `b(ρ) = B(ρ)/ρ`
    LogB,
}

impl BaseProfile {
    /// `r(ρ)/ρ` for `ρ > 0`.
    pub fn rate(&self, rho: f64) -> f64 {
        match *self {
            BaseProfile::Power { lambda, sigma } => lambda * pow(rho, sigma),
            BaseProfile::Root { alpha } => rho.powf(-alpha),
            BaseProfile::Log => (rho * rho).ln(),
            BaseProfile::LogA => log_split::a_rate(rho),
            BaseProfile::LogB => log_split::b_rate(rho),
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        if rho <= TINY {
            0.0
        } else {
            rho * self.rate(rho)
        }
    }

    /// `∫₀^ρ r(s) ds`.
    pub fn primitive(&self, rho: f64) -> f64 {
        if rho <= TINY {
            return 0.0;
        }
        match *self {
            BaseProfile::Power { lambda, sigma } => lambda * pow(rho, sigma + 2.0) / (sigma + 2.0),
            BaseProfile::Root { alpha } => rho.powf(2.0 - alpha) / (2.0 - alpha),
            BaseProfile::Log => log_split::log_primitive(rho),
            BaseProfile::LogA => log_split::a_primitive(rho),
            BaseProfile::LogB => log_split::b_primitive(rho),
        }
    }
}

fn pow(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// A base profile with optional secant truncation below `lower` and above `upper`.
/// `lower = 0` and `upper = ∞` mean no truncation on that side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub base: BaseProfile,
    pub lower: f64,
    pub upper: f64,
}

impl RadialProfile {
    pub fn exact(base: BaseProfile) -> Self {
        RadialProfile { base, lower: 0.0, upper: f64::INFINITY }
    }

    pub fn below(base: BaseProfile, lower: f64) -> Self {
        RadialProfile { base, lower, upper: f64::INFINITY }
    }

    pub fn above(base: BaseProfile, upper: f64) -> Self {
        RadialProfile { base, lower: 0.0, upper }
    }

    pub fn rate(&self, rho: f64) -> f64 {
        if rho <= TINY {
            // the secant slope is the limit of the rate at the origin
            return if self.lower > TINY { self.base.rate(self.lower) } else { 0.0 };
        }
        if rho <= self.lower {
            self.base.rate(self.lower)
        } else if rho >= self.upper {
            self.base.rate(self.upper)
        } else {
            self.base.rate(rho)
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        if rho <= TINY {
            0.0
        } else {
            rho * self.rate(rho)
        }
    }

    pub fn primitive(&self, rho: f64) -> f64 {
        if rho <= TINY {
            return 0.0;
        }
        let secant_low = |x: f64| 0.5 * self.base.rate(self.lower) * x * x;
        let middle = |x: f64| {
            if self.lower > TINY {
                secant_low(self.lower) + self.base.primitive(x) - self.base.primitive(self.lower)
            } else {
                self.base.primitive(x)
            }
        };
        if rho <= self.lower {
            secant_low(rho)
        } else if rho >= self.upper {
            middle(self.upper) + 0.5 * self.base.rate(self.upper) * (rho * rho - self.upper * self.upper)
        } else {
            middle(rho)
        }
    }

    /// Supremum over `ρ ≤ k` of `|r_truncated(ρ) - r(ρ)|`, by dense scan.
    pub fn truncation_gap(&self, k: f64, samples: usize) -> f64 {
        (1..=samples)
            .map(|i| {
                let rho = k * i as f64 / samples as f64;
                (self.value(rho) - self.base.value(rho)).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, pieces: usize) -> f64 {
        // 5-point rule on uniform panels
        const X: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let h = (b - a) / pieces as f64;
        (0..pieces)
            .map(|p| {
                let c = a + (p as f64 + 0.5) * h;
                X.iter().zip(W).map(|(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum()
    }

    #[test]
    fn truncated_power_primitive() {
        let p = RadialProfile::above(BaseProfile::Power { lambda: 1.0, sigma: 2.0 }, 2.0);
        assert_eq!(RadialProfile::exact(p.base).primitive(2.0), 4.0);
        assert_eq!(p.primitive(3.0), 14.0);
        assert_eq!(p.value(3.0), 12.0);
    }

    #[test]
    fn primitive_matches_quadrature_across_thresholds() {
        let m = 50.0f64;
        let cases = [
            RadialProfile::below(BaseProfile::LogA, 1.0 / m),
            RadialProfile::above(BaseProfile::LogB, 0.5),
            RadialProfile::below(BaseProfile::Root { alpha: 0.5 }, 1.0 / 4.0),
            RadialProfile::above(BaseProfile::Power { lambda: -1.5, sigma: 1.3 }, 0.7),
        ];
        for p in cases {
            for rho in [1e-3, 1.0 / m, log_split::JUNCTION, 0.1, 0.5, 0.9, 2.0] {
                // split panels at every kink so the rule stays accurate
                let mut knots = vec![0.0, rho];
                for t in [p.lower, p.upper, log_split::JUNCTION] {
                    if t > 0.0 && t < rho {
                        knots.push(t);
                    }
                }
                knots.sort_by(f64::total_cmp);
                let quad: f64 = knots
                    .windows(2)
                    .map(|w| gauss_legendre(|s| p.value(s), w[0], w[1], 400))
                    .sum();
                assert!(
                    (quad - p.primitive(rho)).abs() < 1e-10 * quad.abs().max(1e-6),
                    "{p:?} at {rho}: {quad} vs {}",
                    p.primitive(rho)
                );
            }
        }
    }

    #[test]
    fn primitive_is_c1_across_thresholds() {
        let p = RadialProfile::below(BaseProfile::LogA, (-4.0f64).exp());
        let t = p.lower;
        let h = 1e-9 * t;
        let left = (p.primitive(t) - p.primitive(t - h)) / h;
        let right = (p.primitive(t + h) - p.primitive(t)) / h;
        assert!((left - p.value(t)).abs() < 1e-6 * p.value(t));
        assert!((right - p.value(t)).abs() < 1e-6 * p.value(t));
    }
}
