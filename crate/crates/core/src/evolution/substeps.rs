//! Exact pointwise flows of the nonlinear parts and the linear propagators.
//!
//! Gauge nonlinearities act pointwise, so the nonlinear part of each
//! equation is an ODE per node:
//!
//! - conservative `c(u) = u h(|u|)`: `u' = i c(u)`, a rotation by `τ h(|u|)`;
//! - dissipative `d(u) = u k(|u|)`: `u' = −d(u)`, so `ρ' = −ρ k(ρ)` with the
//!   phase frozen;
//! - both at once: the modulus follows the dissipative flow and the phase
//!   picks up `∫ h(ρ(s)) ds`.

use num_complex::Complex64;

use crate::grid::{Grid, GridFunction};
use crate::nonlinearity::{BaseProfile, Nonlinearity, RadialProfile};
use crate::resolvent::krylov::{self, Bilinear, SolverError};
use crate::resolvent::SineBasis;

/// Modulus after time `τ ≥ 0` under `ρ' = −r(ρ)` with `r(ρ) = ρ^{1−α}` above
/// `lower` and the secant `ρ lower^{−α}` below it.
pub fn damped_modulus(rho0: f64, tau: f64, alpha: f64, lower: f64) -> f64 {
    if rho0 <= 0.0 {
        return 0.0;
    }
    if rho0 > lower {
        let crossing = (rho0.powf(alpha) - lower.powf(alpha)) / alpha;
        if tau <= crossing || lower <= 0.0 {
            let base = rho0.powf(alpha) - alpha * tau;
            return if base <= 0.0 { 0.0 } else { base.powf(1.0 / alpha) };
        }
        return lower * (-lower.powf(-alpha) * (tau - crossing)).exp();
    }
    rho0 * (-lower.powf(-alpha) * tau).exp()
}

/// `∫₀^τ h(ρ(s)) ds` where `ρ` follows [`damped_modulus`] from `rho0` and
/// `h(ρ) = λ min(ρ, upper)^σ`.
pub fn damped_phase(rho0: f64, tau: f64, alpha: f64, lower: f64, lambda: f64, sigma: f64, upper: f64) -> f64 {
    if rho0 <= 0.0 || tau <= 0.0 {
        return 0.0;
    }
    // segments in time: saturated (ρ > upper), nonlinear damping, linear damping
    let time_to = |from: f64, to: f64| (from.powf(alpha) - to.powf(alpha)) / alpha;
    let mut phase = 0.0;
    let mut t = 0.0;
    let mut rho = rho0;
    if rho > upper {
        let dt = time_to(rho, upper.max(lower)).min(tau);
        phase += lambda * upper.powf(sigma) * dt;
        t += dt;
        rho = damped_modulus(rho0, t, alpha, lower);
        if t >= tau {
            return phase;
        }
    }
    if rho > lower {
        let extinction = rho.powf(alpha) / alpha;
        let limit = if lower > 0.0 { time_to(rho, lower) } else { extinction };
        let dt = limit.min(tau - t);
        let end = {
            let base = rho.powf(alpha) - alpha * dt;
            if base <= 0.0 { 0.0 } else { base.powf(1.0 / alpha) }
        };
        phase += lambda * (rho.powf(sigma + alpha) - end.powf(sigma + alpha)) / (sigma + alpha);
        t += dt;
        rho = end;
        if t >= tau || rho <= 0.0 {
            return phase;
        }
    }
    // linear branch: ρ(s) = ρ e^{−κ s}
    let kappa = lower.powf(-alpha);
    let s = tau - t;
    if sigma == 0.0 {
        phase += lambda * s;
    } else {
        phase += lambda * rho.powf(sigma) * (-(-kappa * sigma * s).exp_m1()) / (kappa * sigma);
    }
    phase
}

/// Exact flow of the nonlinear part of `i u_t + Δu + N(u) = 0` over `τ`.
/// Dissipative parts require `τ ≥ 0`.
pub fn nonlinear_flow(nl: &Nonlinearity, u: &mut GridFunction, tau: f64) {
    match &nl.dissipative {
        None => {
            for z in u.values_mut() {
                let rho = z.norm();
                let theta = tau * nl.conservative_rate(rho);
                *z *= Complex64::from_polar(1.0, theta);
            }
        }
        Some(damping) => {
            let alpha = match damping.base {
                BaseProfile::Root { alpha } => alpha,
                _ => unreachable!("dissipative parts are root profiles"),
            };
            let lower = damping.lower;
            let power = power_part(nl);
            for z in u.values_mut() {
                let rho = z.norm();
                if rho <= crate::nonlinearity::log_split::TINY {
                    *z = Complex64::new(0.0, 0.0);
                    continue;
                }
                let next = damped_modulus(rho, tau, alpha, lower);
                let phase = match power {
                    Some((lambda, sigma, upper)) => damped_phase(rho, tau, alpha, lower, lambda, sigma, upper),
                    None => 0.0,
                };
                *z *= Complex64::from_polar(next / rho, phase);
            }
        }
    }
}

fn power_part(nl: &Nonlinearity) -> Option<(f64, f64, f64)> {
    nl.conservative.iter().find_map(|(c, p): &(f64, RadialProfile)| match p.base {
        BaseProfile::Power { lambda, sigma } => Some((c * lambda, sigma, p.upper)),
        _ => None,
    })
}

/// Free Schrödinger propagator `e^{iτΔ}`.
#[derive(Clone, Debug)]
pub enum LinearPropagator {
    /// Exact multiplication of every sine mode by `e^{−iμτ}`.
    Spectral(SineBasis),
    /// `(I − iτΔ/2) u⁺ = (I + iτΔ/2) u`, solved by COCG.
    CrankNicolson { tol: f64 },
}

impl LinearPropagator {
    pub fn phase_table(basis: &SineBasis, tau: f64) -> Vec<Complex64> {
        basis.eigenvalues().iter().map(|mu| Complex64::from_polar(1.0, -mu * tau)).collect()
    }

    pub fn apply(&self, grid: &Grid, u: &mut GridFunction, tau: f64) -> Result<(), SolverError> {
        if tau == 0.0 {
            return Ok(());
        }
        match self {
            LinearPropagator::Spectral(basis) => {
                basis.apply_table(u, &Self::phase_table(basis, tau));
                Ok(())
            }
            LinearPropagator::CrankNicolson { tol } => crank_nicolson(grid, u, tau, *tol),
        }
    }
}

pub fn crank_nicolson(grid: &Grid, u: &mut GridFunction, tau: f64, tol: f64) -> Result<(), SolverError> {
    let half = Complex64::new(0.0, 0.5 * tau);
    let mut lap = vec![Complex64::new(0.0, 0.0); u.len()];
    grid.laplacian_into(u.values(), &mut lap);
    let rhs: Vec<Complex64> = u.values().iter().zip(&lap).map(|(x, l)| x + half * l).collect();
    let op = |x: &[Complex64], y: &mut [Complex64]| {
        grid.laplacian_into(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi - half * *yi;
        }
    };
    let mut x = u.values().to_vec();
    krylov::solve(op, &rhs, &mut x, Bilinear::Symmetric, tol, 10 * u.len() + 100)?;
    u.values_mut().copy_from_slice(&x);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};
    use crate::nonlinearity::{NonlinearityFamily, TruncationLevel};
    use crate::resolvent::dense;
    use std::f64::consts::PI;

    fn rk4_modulus(rho0: f64, tau: f64, rhs: impl Fn(f64) -> f64, steps: usize) -> f64 {
        let h = tau / steps as f64;
        let mut y = rho0;
        for _ in 0..steps {
            let k1 = rhs(y);
            let k2 = rhs((y + 0.5 * h * k1).max(0.0));
            let k3 = rhs((y + 0.5 * h * k2).max(0.0));
            let k4 = rhs((y + h * k3).max(0.0));
            y = (y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).max(0.0);
        }
        y
    }

    #[test]
    fn examples() {
        let one = |fam: NonlinearityFamily, z: Complex64, tau: f64| {
            let mut u = GridFunction::from_vec(vec![z]);
            nonlinear_flow(&fam.at_level(TruncationLevel::NONE), &mut u, tau);
            u[0]
        };
        assert_eq!(one(NonlinearityFamily::Logarithmic, Complex64::new(1.0, 0.0), 3.7), Complex64::new(1.0, 0.0));
        let power = NonlinearityFamily::PowerLocal { lambda: 1.0, sigma: 2.0 };
        for tau in [0.1, 0.5, 2.0] {
            let z = one(power, Complex64::new(2.0, 0.0), tau);
            assert!((z - Complex64::from_polar(2.0, 4.0 * tau)).norm() < 1e-14);
        }
        let damp = NonlinearityFamily::Damping { alpha: 0.5 };
        for tau in [0.0, 0.5, 1.0, 1.9, 2.0, 3.0] {
            let z = one(damp, Complex64::new(1.0, 0.0), tau);
            let exact = if tau < 2.0 { (1.0 - tau / 2.0).powi(2) } else { 0.0 };
            assert!((z.re - exact).abs() < 1e-15 && z.im == 0.0, "{tau}");
        }
    }

    #[test]
    fn damped_modulus_matches_ode_integration() {
        for (alpha, lower) in [(0.5, 0.25), (0.3, 0.5), (0.8, 0.01)] {
            let rhs = move |r: f64| {
                if r <= lower {
                    -r * lower.powf(-alpha)
                } else {
                    -r.powf(1.0 - alpha)
                }
            };
            for rho0 in [0.05, 0.3, 1.0, 2.5] {
                for tau in [0.1, 0.7, 2.0] {
                    let exact = damped_modulus(rho0, tau, alpha, lower);
                    let num = rk4_modulus(rho0, tau, rhs, 200_000);
                    assert!((exact - num).abs() < 1e-8 * (1.0 + exact), "{alpha} {rho0} {tau}: {exact} vs {num}");
                }
            }
        }
    }

    #[test]
    fn damped_phase_matches_quadrature() {
        let (alpha, lower, lambda) = (0.5, 0.2, 1.3);
        for (sigma, upper) in [(2.0, 1.5), (1.0, f64::INFINITY), (0.0, 2.0), (2.0, 0.2)] {
            for rho0 in [0.1, 0.6, 3.0] {
                let tau = 2.5;
                let n = 200_000;
                let h = tau / n as f64;
                let quad: f64 = (0..n)
                    .map(|i| {
                        let s = (i as f64 + 0.5) * h;
                        lambda * damped_modulus(rho0, s, alpha, lower).min(upper).powf(sigma)
                    })
                    .sum::<f64>()
                    * h;
                let exact = damped_phase(rho0, tau, alpha, lower, lambda, sigma, upper);
                assert!((quad - exact).abs() < 1e-7 * (1.0 + exact.abs()), "{sigma} {upper} {rho0}: {quad} vs {exact}");
            }
        }
    }

    #[test]
    fn spectral_propagator_matches_dense_exponential() {
        let grid = build_grid(&DomainSpec::interval(0.0, PI, PI / 33.0).unwrap()).unwrap();
        assert_eq!(grid.len(), 32);
        let basis = SineBasis::new(&grid).unwrap();
        let tau = 0.37;
        let lap = dense::laplacian_matrix(&grid).map(|x| Complex64::new(0.0, x * tau));
        let expm = lap.exp();
        let u = grid.sample(|x| Complex64::new((x[0] * 3.0).sin() + 0.2 * x[0] * (PI - x[0]), (5.0 * x[0]).sin()));
        let reference = dense::from_vector(&(&expm * dense::to_vector(&u)));
        let mut v = u.clone();
        LinearPropagator::Spectral(basis).apply(&grid, &mut v, tau).unwrap();
        assert!((&v - &reference).max_modulus() < 1e-10);
        assert!((grid.mass(&v) / grid.mass(&u) - 1.0).abs() < 1e-13);

        let mut w = u.clone();
        LinearPropagator::CrankNicolson { tol: 1e-13 }.apply(&grid, &mut w, 1e-4).unwrap();
        let mut s = u.clone();
        LinearPropagator::Spectral(SineBasis::new(&grid).unwrap()).apply(&grid, &mut s, 1e-4).unwrap();
        assert!((&w - &s).max_modulus() < 1e-4);
        assert!((grid.mass(&w) / grid.mass(&u) - 1.0).abs() < 1e-11);
    }
}
