//! Masked uniform grids with homogeneous Dirichlet boundary.
//!
//! An open set is described by a bounding box, a per-axis spacing and a
//! boolean mask over the nodes of the box lattice. Nodes on the border of the
//! box are always exterior, so a field that vanishes outside the mask is a
//! faithful discrete version of `u = 0` on the boundary.

mod function;
pub mod io;
mod norms;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use function::GridFunction;
pub use norms::NormKind;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("unsupported dimension {0}; only 1 and 2 are implemented")]
    Dimension(usize),
    #[error("axis {axis}: invalid interval [{lo}, {hi}]")]
    Interval { axis: usize, lo: f64, hi: f64 },
    #[error("axis {axis}: spacing {spacing} does not divide the side length {length} into whole cells")]
    Spacing { axis: usize, spacing: f64, length: f64 },
    #[error("mask has {got} entries, lattice has {expected} nodes")]
    MaskLength { expected: usize, got: usize },
    #[error("mask marks border node {0} as interior")]
    BorderInterior(usize),
    #[error("domain has no interior nodes")]
    EmptyInterior,
    #[error("field has {got} values, grid has {expected} interior nodes")]
    FieldLength { expected: usize, got: usize },
    #[error("Lp exponent must satisfy p >= 1, got {0}")]
    Exponent(f64),
    #[error("malformed domain document: {0}")]
    Document(String),
}

/// Geometric description of a domain: box, spacing and node mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dimension: usize,
    pub bounding_box: Vec<[f64; 2]>,
    pub spacing: Vec<f64>,
    /// One entry per lattice node, row-major with axis 0 slowest.
    pub mask: Vec<bool>,
}

const CELL_TOL: f64 = 1e-9;

fn cell_count(lo: f64, hi: f64, h: f64, axis: usize) -> Result<usize, GridError> {
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(GridError::Interval { axis, lo, hi });
    }
    let length = hi - lo;
    if !(h.is_finite() && h > 0.0) {
        return Err(GridError::Spacing { axis, spacing: h, length });
    }
    let cells = length / h;
    let rounded = cells.round();
    if rounded < 1.0 || (cells - rounded).abs() > CELL_TOL * rounded.max(1.0) {
        return Err(GridError::Spacing { axis, spacing: h, length });
    }
    Ok(rounded as usize)
}

impl DomainSpec {
    /// Interval `(lo, hi)` with every non-endpoint node inside.
    pub fn interval(lo: f64, hi: f64, h: f64) -> Result<Self, GridError> {
        Self::full_box(vec![[lo, hi]], vec![h])
    }

    /// Rectangle with every non-border node inside.
    pub fn rectangle(x: [f64; 2], y: [f64; 2], hx: f64, hy: f64) -> Result<Self, GridError> {
        Self::full_box(vec![x, y], vec![hx, hy])
    }

    pub fn full_box(bounding_box: Vec<[f64; 2]>, spacing: Vec<f64>) -> Result<Self, GridError> {
        let mut spec = DomainSpec {
            dimension: bounding_box.len(),
            bounding_box,
            spacing,
            mask: Vec::new(),
        };
        let counts = spec.counts()?;
        let total: usize = counts.iter().product();
        spec.mask = (0..total).map(|n| !is_border(n, &counts)).collect();
        Ok(spec)
    }

    /// Keep only nodes whose coordinates satisfy `inside`. Border nodes stay exterior.
    pub fn restrict<F: Fn(&[f64]) -> bool>(mut self, inside: F) -> Self {
        let counts = match self.counts() {
            Ok(c) => c,
            Err(_) => return self,
        };
        let mut x = vec![0.0; self.dimension];
        for (n, m) in self.mask.iter_mut().enumerate() {
            if !*m {
                continue;
            }
            lattice_coords(n, &counts, &self.bounding_box, &self.spacing, &mut x);
            *m = inside(&x);
        }
        self
    }

    /// Points per axis, including the two boundary nodes.
    pub fn counts(&self) -> Result<Vec<usize>, GridError> {
        if self.dimension != 1 && self.dimension != 2 {
            return Err(GridError::Dimension(self.dimension));
        }
        if self.bounding_box.len() != self.dimension || self.spacing.len() != self.dimension {
            return Err(GridError::Dimension(self.bounding_box.len()));
        }
        (0..self.dimension)
            .map(|a| {
                let [lo, hi] = self.bounding_box[a];
                cell_count(lo, hi, self.spacing[a], a).map(|c| c + 1)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<Vec<usize>, GridError> {
        let counts = self.counts()?;
        let total: usize = counts.iter().product();
        if self.mask.len() != total {
            return Err(GridError::MaskLength { expected: total, got: self.mask.len() });
        }
        for (n, &m) in self.mask.iter().enumerate() {
            if m && is_border(n, &counts) {
                return Err(GridError::BorderInterior(n));
            }
        }
        if !self.mask.iter().any(|&m| m) {
            return Err(GridError::EmptyInterior);
        }
        Ok(counts)
    }
}

fn is_border(n: usize, counts: &[usize]) -> bool {
    let mut rest = n;
    for a in (0..counts.len()).rev() {
        let i = rest % counts[a];
        rest /= counts[a];
        if i == 0 || i + 1 == counts[a] {
            return true;
        }
    }
    false
}

fn lattice_coords(n: usize, counts: &[usize], bbox: &[[f64; 2]], h: &[f64], out: &mut [f64]) {
    let mut rest = n;
    for a in (0..counts.len()).rev() {
        let i = rest % counts[a];
        rest /= counts[a];
        out[a] = bbox[a][0] + i as f64 * h[a];
    }
}

/// Neighbor slots per interior node: `[minus_0, plus_0, minus_1, plus_1]`.
/// `None` means the neighbor is exterior and carries the Dirichlet zero.
pub type Neighbors = [Option<usize>; 4];

/// A lattice node that contributes to the forward-difference gradient:
/// its own interior index (if any) and the interior index of its forward
/// neighbor along each axis (if any, and if the forward node exists).
#[derive(Clone, Debug)]
struct GradientNode {
    own: Option<usize>,
    forward: [Option<usize>; 2],
    has_forward: [bool; 2],
}

/// Discretization of a [`DomainSpec`].
#[derive(Clone, Debug)]
pub struct Grid {
    spec: DomainSpec,
    counts: Vec<usize>,
    interior: Vec<usize>,
    node_to_interior: Vec<Option<usize>>,
    neighbors: Vec<Neighbors>,
    gradient_nodes: Vec<GradientNode>,
    cell_measure: f64,
    full_rectangle: bool,
}

pub fn build_grid(spec: &DomainSpec) -> Result<Grid, GridError> {
    Grid::new(spec.clone())
}

impl Grid {
    pub fn new(spec: DomainSpec) -> Result<Self, GridError> {
        let counts = spec.validate()?;
        let total = spec.mask.len();
        let mut node_to_interior = vec![None; total];
        let mut interior = Vec::new();
        for (n, &m) in spec.mask.iter().enumerate() {
            if m {
                node_to_interior[n] = Some(interior.len());
                interior.push(n);
            }
        }
        let dim = spec.dimension;
        let strides: Vec<usize> = (0..dim).map(|a| counts[a + 1..].iter().product()).collect();

        let neighbors = interior
            .iter()
            .map(|&n| {
                let mut nb = [None; 4];
                for a in 0..dim {
                    // interior nodes are never on the border, so both neighbors exist
                    nb[2 * a] = node_to_interior[n - strides[a]];
                    nb[2 * a + 1] = node_to_interior[n + strides[a]];
                }
                nb
            })
            .collect();

        let mut gradient_nodes = Vec::new();
        for n in 0..total {
            let mut g = GradientNode {
                own: node_to_interior[n],
                forward: [None; 2],
                has_forward: [false; 2],
            };
            let mut touches = g.own.is_some();
            for a in 0..dim {
                let i = (n / strides[a]) % counts[a];
                if i + 1 < counts[a] {
                    g.has_forward[a] = true;
                    g.forward[a] = node_to_interior[n + strides[a]];
                    touches |= g.forward[a].is_some();
                }
            }
            if touches {
                gradient_nodes.push(g);
            }
        }

        let cell_measure = spec.spacing.iter().product();
        let full_rectangle = (0..total).all(|n| spec.mask[n] != is_border(n, &counts));
        Ok(Grid {
            spec,
            counts,
            interior,
            node_to_interior,
            neighbors,
            gradient_nodes,
            cell_measure,
            full_rectangle,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spec.spacing
    }

    /// Number of interior nodes (unknowns).
    pub fn len(&self) -> usize {
        self.interior.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    /// Discrete measure of the domain: interior node count times cell measure.
    pub fn measure(&self) -> f64 {
        self.cell_measure * self.len() as f64
    }

    /// True when the mask is the whole box minus its border, which is what
    /// the sine-transform solvers require.
    pub fn is_full_rectangle(&self) -> bool {
        self.full_rectangle
    }

    /// Interior points per axis for a full rectangle.
    pub fn interior_counts(&self) -> Vec<usize> {
        self.counts.iter().map(|c| c - 2).collect()
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_index(&self, node: usize) -> Option<usize> {
        self.node_to_interior.get(node).copied().flatten()
    }

    pub fn neighbors(&self, k: usize) -> &Neighbors {
        &self.neighbors[k]
    }

    /// Coordinates of interior node `k`.
    pub fn coords(&self, k: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dimension()];
        lattice_coords(
            self.interior[k],
            &self.counts,
            &self.spec.bounding_box,
            &self.spec.spacing,
            &mut x,
        );
        x
    }

    /// Lattice multi-index of interior node `k`.
    pub fn lattice_index(&self, k: usize) -> Vec<usize> {
        let mut rest = self.interior[k];
        let mut idx = vec![0; self.dimension()];
        for a in (0..self.dimension()).rev() {
            idx[a] = rest % self.counts[a];
            rest /= self.counts[a];
        }
        idx
    }

    /// Euclidean diameter of the bounding box.
    pub fn box_diameter(&self) -> f64 {
        self.spec
            .bounding_box
            .iter()
            .map(|[lo, hi]| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest distance from the coordinate origin to a box corner.
    pub fn max_radius(&self) -> f64 {
        self.spec
            .bounding_box
            .iter()
            .map(|[lo, hi]| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn check(&self, u: &GridFunction) -> Result<(), GridError> {
        if u.len() != self.len() {
            return Err(GridError::FieldLength { expected: self.len(), got: u.len() });
        }
        Ok(())
    }

    /// Evaluate a function at every interior node.
    pub fn sample<F: Fn(&[f64]) -> num_complex::Complex64>(&self, f: F) -> GridFunction {
        GridFunction::from_vec((0..self.len()).map(|k| f(&self.coords(k))).collect())
    }

    /// Interior nodes inside the ball `|x| < radius` (the sub-domain `Omega ∩ B(0, radius)`).
    pub fn ball_mask(&self, radius: f64) -> Vec<bool> {
        (0..self.len())
            .map(|k| self.coords(k).iter().map(|x| x * x).sum::<f64>().sqrt() < radius)
            .collect()
    }

    /// Discrete Dirichlet Laplacian with the standard `2N+1`-point stencil.
    pub fn apply_laplacian(&self, u: &GridFunction) -> GridFunction {
        let mut out = GridFunction::zeros(self.len());
        self.laplacian_into(u.values(), out.values_mut());
        out
    }

    pub(crate) fn laplacian_into(&self, u: &[num_complex::Complex64], out: &mut [num_complex::Complex64]) {
        let dim = self.dimension();
        let inv_h2: Vec<f64> = self.spec.spacing.iter().map(|h| 1.0 / (h * h)).collect();
        for (k, nb) in self.neighbors.iter().enumerate() {
            let centre = u[k];
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for a in 0..dim {
                let minus = nb[2 * a].map_or(num_complex::Complex64::new(0.0, 0.0), |j| u[j]);
                let plus = nb[2 * a + 1].map_or(num_complex::Complex64::new(0.0, 0.0), |j| u[j]);
                acc += (minus + plus - 2.0 * centre) * inv_h2[a];
            }
            out[k] = acc;
        }
    }

    /// Forward-difference gradient magnitude squared at every contributing
    /// lattice node. Summing over nodes covers every edge touching the domain.
    pub(crate) fn for_each_gradient<F: FnMut(f64)>(&self, u: &[num_complex::Complex64], mut f: F) {
        let zero = num_complex::Complex64::new(0.0, 0.0);
        let dim = self.dimension();
        for g in &self.gradient_nodes {
            let own = g.own.map_or(zero, |k| u[k]);
            let mut sq = 0.0;
            for a in 0..dim {
                if g.has_forward[a] {
                    let fwd = g.forward[a].map_or(zero, |k| u[k]);
                    sq += ((fwd - own) / self.spec.spacing[a]).norm_sqr();
                }
            }
            f(sq);
        }
    }

    /// Radial cutoff `psi_R(x) = psi(x / R)` with `psi = 1` on the unit ball,
    /// `0` outside the ball of radius 2 and a quintic smoothstep taper between.
    pub fn cutoff_field(&self, radius: f64) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let r = self.coords(k).iter().map(|x| x * x).sum::<f64>().sqrt();
                smooth_cutoff(r / radius)
            })
            .collect()
    }
}

/// `1` for `s <= 1`, `0` for `s >= 2`, quintic smoothstep in between.
pub fn smooth_cutoff(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let t = s - 1.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}
