use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

/// Complex field on the interior nodes of a grid. Exterior values are zero.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GridFunction {
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(n: usize) -> Self {
        GridFunction { values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_vec(values: Vec<Complex64>) -> Self {
        GridFunction { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        GridFunction { values: values.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        GridFunction { values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    /// Pointwise product with a real weight (e.g. a cutoff).
    pub fn weighted(&self, w: &[f64]) -> Self {
        GridFunction { values: self.values.iter().zip(w).map(|(z, &w)| z * w).collect() }
    }

    /// `self += a * other`
    pub fn axpy(&mut self, a: Complex64, other: &GridFunction) {
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Index<usize> for GridFunction {
    type Output = Complex64;
    fn index(&self, k: usize) -> &Complex64 {
        &self.values[k]
    }
}

impl IndexMut<usize> for GridFunction {
    fn index_mut(&mut self, k: usize) -> &mut Complex64 {
        &mut self.values[k]
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: &GridFunction) -> GridFunction {
        GridFunction { values: self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: &GridFunction) -> GridFunction {
        GridFunction { values: self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect() }
    }
}

impl Mul<Complex64> for &GridFunction {
    type Output = GridFunction;
    fn mul(self, rhs: Complex64) -> GridFunction {
        self.map(|z| z * rhs)
    }
}
