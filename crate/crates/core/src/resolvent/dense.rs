//! Dense matrices of the discrete operators, for small grids and as an
//! independent reference for the fast solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::grid::{Grid, GridFunction};

/// Largest grid accepted by the dense routines.
pub const DENSE_LIMIT: usize = 4096;

/// Matrix of the discrete Laplacian `Δ` (negative semidefinite).
pub fn laplacian_matrix(grid: &Grid) -> DMatrix<f64> {
    let n = grid.len();
    let mut a = DMatrix::zeros(n, n);
    let inv_h2: Vec<f64> = grid.spacing().iter().map(|h| 1.0 / (h * h)).collect();
    for k in 0..n {
        let nb = grid.neighbors(k);
        for axis in 0..grid.dimension() {
            a[(k, k)] -= 2.0 * inv_h2[axis];
            for j in [nb[2 * axis], nb[2 * axis + 1]].into_iter().flatten() {
                a[(k, j)] += inv_h2[axis];
            }
        }
    }
    a
}

/// Cholesky factor of `I − Δ/m`, applied to complex right-hand sides.
#[derive(Clone, Debug)]
pub struct DenseResolvent {
    factor: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl DenseResolvent {
    pub fn new(grid: &Grid, m: f64) -> Option<Self> {
        if grid.len() > DENSE_LIMIT {
            return None;
        }
        let n = grid.len();
        let a = DMatrix::identity(n, n) - laplacian_matrix(grid) / m;
        a.cholesky().map(|factor| DenseResolvent { factor })
    }

    pub fn apply(&self, f: &GridFunction) -> GridFunction {
        let re = DVector::from_iterator(f.len(), f.values().iter().map(|z| z.re));
        let im = DVector::from_iterator(f.len(), f.values().iter().map(|z| z.im));
        let (re, im) = (self.factor.solve(&re), self.factor.solve(&im));
        GridFunction::from_vec(re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect())
    }
}

pub fn to_vector(u: &GridFunction) -> DVector<Complex64> {
    DVector::from_column_slice(u.values())
}

pub fn from_vector(v: &DVector<Complex64>) -> GridFunction {
    GridFunction::from_vec(v.iter().copied().collect())
}
