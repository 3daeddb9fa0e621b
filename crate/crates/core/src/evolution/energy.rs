//! Energy functionals of the evolved and regularized problems.
//!
//! `E_m(u) = ½‖∇u‖² − ∫ P_m(|u|)` with `P_m` the primitive of the conservative
//! profile at level `m`; the Yosida scheme evaluates the potential at `J_m u`.
//! The untruncated logarithmic energy is `½‖∇u‖² − ½∫|u|² log|u|²`, so that
//! `E_m → E + ½M` as `m → ∞`.

use serde::Serialize;

use crate::grid::{Grid, GridFunction};
use crate::nonlinearity::{log_split, Nonlinearity, NonlinearityFamily, TruncationLevel};
use crate::resolvent::{ResolventError, ResolventSolver, YosidaOperator};

use super::{Scheme, SchemeConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Energies {
    /// Energy of the limiting problem.
    pub exact: f64,
    /// Energy conserved by the regularized problem.
    pub regularized: f64,
}

/// `∫ P(|u|)` for the conservative part of `nl`.
pub fn potential(grid: &Grid, nl: &Nonlinearity, u: &GridFunction) -> f64 {
    if nl.conservative.is_empty() {
        return 0.0;
    }
    u.values().iter().map(|z| nl.conservative_primitive(z.norm())).sum::<f64>() * grid.cell_measure()
}

/// `½‖∇u‖² − ½∫|u|² log|u|²`.
pub fn log_energy(grid: &Grid, u: &GridFunction) -> f64 {
    let f: f64 = u.values().iter().map(|z| log_split::f_weight(z.norm())).sum();
    0.5 * grid.gradient_norm_sq(u) - 0.5 * f * grid.cell_measure()
}

/// `E_m` for the family at level `m`, with the potential evaluated at `J_m u`
/// when `yosida` is given.
pub fn regularized_energy(
    grid: &Grid,
    family: &NonlinearityFamily,
    m: TruncationLevel,
    u: &GridFunction,
    yosida: Option<&YosidaOperator<'_>>,
) -> Result<f64, ResolventError> {
    let kinetic = 0.5 * grid.gradient_norm_sq(u);
    Ok(match yosida {
        Some(op) => kinetic - potential(grid, &family.at_level(TruncationLevel::NONE), &op.apply(u)?),
        None => kinetic - potential(grid, &family.at_level(m), u),
    })
}

pub fn exact_energy(grid: &Grid, family: &NonlinearityFamily, u: &GridFunction) -> f64 {
    match family {
        NonlinearityFamily::Logarithmic => log_energy(grid, u),
        _ => 0.5 * grid.gradient_norm_sq(u) - potential(grid, &family.at_level(TruncationLevel::NONE), u),
    }
}

pub fn energy(config: &SchemeConfig, grid: &Grid, u: &GridFunction) -> Result<Energies, ResolventError> {
    let op = match config.scheme {
        Scheme::YosidaRegularized => Some(YosidaOperator::new(grid, config.m.value(), ResolventSolver::automatic(grid))?),
        _ => None,
    };
    Ok(Energies {
        exact: exact_energy(grid, &config.family, u),
        regularized: regularized_energy(grid, &config.family, config.m, u, op.as_ref())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};
    use crate::nonlinearity::TruncationLevel;
    use num_complex::Complex64;

    #[test]
    fn zero_field_has_zero_energy() {
        let grid = build_grid(&DomainSpec::interval(0.0, 1.0, 0.05).unwrap()).unwrap();
        let u = GridFunction::zeros(grid.len());
        for fam in [
            NonlinearityFamily::PowerLocal { lambda: 1.0, sigma: 2.0 },
            NonlinearityFamily::Logarithmic,
            NonlinearityFamily::Damping { alpha: 0.5 },
        ] {
            assert_eq!(exact_energy(&grid, &fam, &u), 0.0);
        }
    }

    #[test]
    fn cubic_energy_by_direct_quadrature() {
        let grid = build_grid(&DomainSpec::rectangle([0.0, 2.0], [0.0, 1.0], 0.05, 0.05).unwrap()).unwrap();
        let u = grid.sample(|x| Complex64::new((x[0] * 1.3).sin() * x[1] * (1.0 - x[1]) * 4.0, 0.3 * x[0]));
        let fam = NonlinearityFamily::PowerLocal { lambda: 1.0, sigma: 2.0 };
        let l4 = grid.lp_norm(&u, 4.0).unwrap();
        let direct = 0.5 * grid.gradient_norm_sq(&u) - 0.25 * l4.powi(4);
        assert!((exact_energy(&grid, &fam, &u) - direct).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn log_regularized_energy_has_mass_offset() {
        let grid = build_grid(&DomainSpec::interval(-6.0, 6.0, 0.02).unwrap()).unwrap();
        let u = grid.sample(|x| Complex64::new(1.5 * (-x[0] * x[0] / 2.0).exp(), 0.0));
        let fam = NonlinearityFamily::Logarithmic;
        let target = exact_energy(&grid, &fam, &u) + 0.5 * grid.mass(&u);
        let gaps: Vec<f64> = [2f64.powi(5), 2f64.powi(8), 2f64.powi(11), 2f64.powi(14)]
            .iter()
            .map(|&m| {
                let e = regularized_energy(&grid, &fam, TruncationLevel::new(m).unwrap(), &u, None).unwrap();
                (e - target).abs()
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }
}
