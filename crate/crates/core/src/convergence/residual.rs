//! `‖g_m(u) − g(u)‖₂` for a field, per family.

use num_complex::Complex64;
use serde::Serialize;

use crate::grid::{Grid, GridFunction};
use crate::nonlinearity::{log_parts_trunc, BaseProfile, NonlinearityFamily, RadialProfile, TruncationLevel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TruncationResidual {
    Single(f64),
    /// Separate residuals of the small-amplitude part `a_m` and the
    /// large-amplitude part `b_m`.
    LogParts { a: f64, b: f64 },
}

impl TruncationResidual {
    pub fn total(&self) -> f64 {
        match *self {
            TruncationResidual::Single(r) => r,
            TruncationResidual::LogParts { a, b } => a + b,
        }
    }
}

fn l2_of(grid: &Grid, u: &GridFunction, f: impl Fn(Complex64) -> Complex64) -> f64 {
    u.values().iter().map(|&z| f(z).norm_sqr()).sum::<f64>().sqrt() * grid.cell_measure().sqrt()
}

pub fn truncation_residual(grid: &Grid, family: &NonlinearityFamily, m: TruncationLevel, u: &GridFunction) -> TruncationResidual {
    match family {
        NonlinearityFamily::Logarithmic => {
            let a = RadialProfile::exact(BaseProfile::LogA);
            let b = RadialProfile::exact(BaseProfile::LogB);
            let (ra, rb) = (
                l2_of(grid, u, |z| log_parts_trunc(m, z).0 - z * a.rate(z.norm())),
                l2_of(grid, u, |z| log_parts_trunc(m, z).1 - z * b.rate(z.norm())),
            );
            TruncationResidual::LogParts { a: ra, b: rb }
        }
        _ => {
            let exact = family.at_level(TruncationLevel::NONE);
            let trunc = family.at_level(m);
            TruncationResidual::Single(l2_of(grid, u, |z| {
                if z.norm() <= crate::nonlinearity::log_split::TINY {
                    return Complex64::new(0.0, 0.0);
                }
                trunc.eval(z).equation_term() - exact.eval(z).equation_term()
            }))
        }
    }
}
