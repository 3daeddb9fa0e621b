//! Conjugate-gradient iterations for the two operator shapes that occur:
//! Hermitian positive definite (`I − Δ/m`) and complex symmetric
//! (`I − iτΔ/2`, solved with the conjugate-orthogonal variant).

use num_complex::Complex64;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq)]
#[error("iterative solver stalled after {iterations} iterations, relative residual {residual:e}")]
pub struct SolverError {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bilinear {
    /// `⟨x, y⟩ = Σ x conj(y)`: classical CG for Hermitian positive operators.
    Hermitian,
    /// `(x, y) = Σ x y`: COCG for complex symmetric operators.
    Symmetric,
}

fn dot(kind: Bilinear, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    match kind {
        Bilinear::Hermitian => x.iter().zip(y).map(|(a, b)| a.conj() * b).sum(),
        Bilinear::Symmetric => x.iter().zip(y).map(|(a, b)| a * b).sum(),
    }
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Solve `A x = b` starting from `x` (used as initial guess).
pub fn solve<A>(
    apply: A,
    b: &[Complex64],
    x: &mut [Complex64],
    kind: Bilinear,
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats, SolverError>
where
    A: Fn(&[Complex64], &mut [Complex64]),
{
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        return Ok(SolveStats { iterations: 0, residual: 0.0 });
    }
    let mut ax = vec![Complex64::new(0.0, 0.0); n];
    apply(x, &mut ax);
    let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rho = dot(kind, &r, &r);
    let mut history = vec![norm(&r) / b_norm];
    for it in 0..max_iter {
        let res = *history.last().unwrap();
        if res <= tol {
            return Ok(SolveStats { iterations: it, residual: res });
        }
        apply(&p, &mut ax);
        let pap = dot(kind, &p, &ax);
        if pap.norm() == 0.0 {
            break;
        }
        let alpha = rho / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ax[i];
        }
        let rho_next = dot(kind, &r, &r);
        let beta = rho_next / rho;
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        history.push(norm(&r) / b_norm);
    }
    let residual = *history.last().unwrap();
    if residual <= tol {
        return Ok(SolveStats { iterations: history.len() - 1, residual });
    }
    Err(SolverError { iterations: history.len() - 1, residual, history })
}
