//! Discrete sine basis of the Dirichlet Laplacian on a full rectangle.
//!
//! Along an axis with `n` interior points the eigenvectors are
//! `s_k(j) = sin(πjk/(n+1))` with `−Δ s_k = μ_k s_k`,
//! `μ_k = (4/Δx²) sin²(πk/(2(n+1)))`. The DST-I is evaluated through an FFT of
//! the odd extension of length `2(n+1)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::{Grid, GridFunction};

#[derive(Clone)]
struct Axis {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    eigenvalues: Vec<f64>,
}

impl Axis {
    fn new(planner: &mut FftPlanner<f64>, n: usize, h: f64) -> Self {
        let eigenvalues = (1..=n)
            .map(|k| {
                let s = (std::f64::consts::PI * k as f64 / (2.0 * (n + 1) as f64)).sin();
                4.0 * s * s / (h * h)
            })
            .collect();
        Axis { n, fft: planner.plan_fft_forward(2 * (n + 1)), eigenvalues }
    }

    /// In-place unnormalized DST-I of each line `data[offset + stride·j]`.
    fn transform_lines(&self, data: &mut [Complex64], lines: impl Iterator<Item = usize>, stride: usize) {
        let len = 2 * (self.n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let half_i = Complex64::new(0.0, 0.5);
        for offset in lines {
            buf[0] = Complex64::new(0.0, 0.0);
            buf[self.n + 1] = Complex64::new(0.0, 0.0);
            for j in 0..self.n {
                let x = data[offset + stride * j];
                buf[j + 1] = x;
                buf[len - 1 - j] = -x;
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..self.n {
                data[offset + stride * k] = buf[k + 1] * half_i;
            }
        }
    }
}

/// Sine eigenbasis of the discrete Dirichlet Laplacian of a full-rectangle grid.
#[derive(Clone)]
pub struct SineBasis {
    axes: Vec<Axis>,
    eigenvalues: Vec<f64>,
    /// `Π (n_a + 1)/2`, exact in binary; dividing by it avoids a rounded reciprocal.
    denominator: f64,
}

impl std::fmt::Debug for SineBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineBasis")
            .field("points", &self.axes.iter().map(|a| a.n).collect::<Vec<_>>())
            .finish()
    }
}

impl SineBasis {
    /// `None` unless the grid mask is the full rectangle.
    pub fn new(grid: &Grid) -> Option<Self> {
        if !grid.is_full_rectangle() {
            return None;
        }
        let mut planner = FftPlanner::new();
        let axes: Vec<Axis> = grid
            .interior_counts()
            .iter()
            .zip(grid.spacing())
            .map(|(&n, &h)| Axis::new(&mut planner, n, h))
            .collect();
        let eigenvalues = match axes.as_slice() {
            [a] => a.eigenvalues.clone(),
            [a, b] => a
                .eigenvalues
                .iter()
                .flat_map(|x| b.eigenvalues.iter().map(move |y| x + y))
                .collect(),
            _ => unreachable!("grids are one- or two-dimensional"),
        };
        let denominator = axes.iter().map(|a| (a.n + 1) as f64 / 2.0).product();
        Some(SineBasis { axes, eigenvalues, denominator })
    }

    /// Eigenvalues of `−Δ`, in the interior ordering of the grid.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Sine coefficients `c` with `u = Σ c_k s_k` (products of axis sines).
    pub fn analyze(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut data = u.to_vec();
        self.dst(&mut data);
        let d = self.denominator;
        data.iter_mut().for_each(|z| *z /= d);
        data
    }

    /// Inverse of [`SineBasis::analyze`].
    pub fn synthesize(&self, coefficients: &[Complex64]) -> Vec<Complex64> {
        let mut data = coefficients.to_vec();
        self.dst(&mut data);
        data
    }

    fn dst(&self, data: &mut [Complex64]) {
        match self.axes.as_slice() {
            [a] => a.transform_lines(data, std::iter::once(0), 1),
            [a, b] => {
                // axis 1 is contiguous, axis 0 has stride n1
                b.transform_lines(data, (0..a.n).map(|i| i * b.n), 1);
                a.transform_lines(data, 0..b.n, b.n);
            }
            _ => unreachable!(),
        }
    }

    /// `u ↦ Σ f(μ_k) c_k s_k`.
    pub fn apply_multiplier(&self, u: &GridFunction, f: impl Fn(f64) -> Complex64) -> GridFunction {
        let mut data = u.values().to_vec();
        self.dst(&mut data);
        let d = self.denominator;
        for (z, &mu) in data.iter_mut().zip(&self.eigenvalues) {
            *z = *z * f(mu) / d;
        }
        self.dst(&mut data);
        GridFunction::from_vec(data)
    }

    /// Like [`SineBasis::apply_multiplier`] with a precomputed table.
    pub fn apply_table(&self, u: &mut GridFunction, table: &[Complex64]) {
        let data = u.values_mut();
        self.dst(data);
        let d = self.denominator;
        for (z, t) in data.iter_mut().zip(table) {
            *z = *z * t / d;
        }
        self.dst(data);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridFunction::from_vec(
            (0..n)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn masked_grid_has_no_basis() {
        let spec = DomainSpec::rectangle([0.0, 1.0], [0.0, 1.0], 0.1, 0.1)
            .unwrap()
            .restrict(|x| x[0] < 0.75);
        assert!(SineBasis::new(&build_grid(&spec).unwrap()).is_none());
    }

    #[test]
    fn roundtrip_and_laplacian_match_stencil() {
        for spec in [
            DomainSpec::interval(0.0, 2.0, 0.0625).unwrap(),
            DomainSpec::rectangle([0.0, 1.0], [-1.0, 1.0], 0.125, 0.0625).unwrap(),
        ] {
            let grid = build_grid(&spec).unwrap();
            let basis = SineBasis::new(&grid).unwrap();
            let u = random_field(grid.len(), 3);
            let back = basis.synthesize(&basis.analyze(u.values()));
            let err: f64 = back.iter().zip(u.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);

            let lap = basis.apply_multiplier(&u, |mu| Complex64::new(-mu, 0.0));
            let stencil = grid.apply_laplacian(&u);
            let err = (&lap - &stencil).max_modulus();
            assert!(err < 1e-9 * stencil.max_modulus(), "{err}");
        }
    }

    #[test]
    fn coefficients_of_a_pure_mode() {
        let grid = build_grid(&DomainSpec::interval(0.0, std::f64::consts::PI, std::f64::consts::PI / 16.0).unwrap())
            .unwrap();
        let basis = SineBasis::new(&grid).unwrap();
        let u = grid.sample(|x| Complex64::new((3.0 * x[0]).sin(), 0.0));
        let c = basis.analyze(u.values());
        for (k, z) in c.iter().enumerate() {
            let expected = if k == 2 { 1.0 } else { 0.0 };
            assert!((z - expected).norm() < 1e-13, "mode {k}: {z}");
        }
    }
}
