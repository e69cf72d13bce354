//! Flat closed model manifolds: the circle `R/LZ` and the flat 2-torus
//! `R/L₁Z × R/L₂Z`, each carrying a uniform periodic grid and a smooth
//! weight `φ` defining the measure `dμ = e^{−φ} dv`.
//!
//! The grid is node-centred: axis `a` holds `grid[a]` points at spacing
//! `h_a = lengths[a] / grid[a]`, coordinates `x_j = j·h_a`, with periodic
//! wraparound. All per-node data (`φ`, `e^{−φ}`, staggered edge weights)
//! is precomputed at construction so the operator kernels are pure array
//! arithmetic.

use crate::error::{Error, Result};
use std::sync::Arc;

/// Weight function `φ` selecting the measure `dμ = e^{−φ} dv`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    /// `φ ≡ 0`: the unweighted Riemannian measure.
    Zero,
    /// `φ(x) = amplitude · sin(2π x₁ / L₁)` — a smooth non-trivial weight
    /// depending on the first coordinate only.
    SinFirstCoord { amplitude: f64 },
    /// Arbitrary finite samples, one per grid node.
    Custom(Vec<f64>),
}

/// A flat closed manifold with its grid and weight, fully realised:
/// coordinates, `φ`, node weights `e^{−φ}` and staggered edge weights are
/// all tabulated.
///
/// `Manifold` values are immutable and shared via [`Arc`]; fields hold a
/// handle to the manifold they live on.
#[derive(Debug)]
pub struct Manifold {
    lengths: Vec<f64>,
    grid: Vec<usize>,
    spacing: Vec<f64>,
    weight: Weight,
    /// `φ` at each node.
    phi: Vec<f64>,
    /// `e^{−φ}` at each node.
    node_w: Vec<f64>,
    /// Per axis `a`, `edge_w[a][i] = e^{−(φ_i + φ_{i+1_a})/2}` — the weight
    /// of the staggered edge from node `i` to its forward neighbour along
    /// axis `a`. Geometric-mean interpolation keeps the divergence-form
    /// operator second-order accurate.
    edge_w: Vec<Vec<f64>>,
    /// True when `φ` is constant across all nodes (bitwise equality);
    /// several curvature formulas specialise on this.
    phi_constant: bool,
}

impl Manifold {
    /// Circle of circumference `length` with `n` grid nodes.
    pub fn circle(length: f64, n: usize, weight: Weight) -> Result<Arc<Self>> {
        Self::new(vec![length], vec![n], weight)
    }

    /// Flat 2-torus with side lengths `lengths` and per-axis node counts
    /// `grid`.
    pub fn torus(lengths: [f64; 2], grid: [usize; 2], weight: Weight) -> Result<Arc<Self>> {
        Self::new(lengths.to_vec(), grid.to_vec(), weight)
    }

    fn new(lengths: Vec<f64>, grid: Vec<usize>, weight: Weight) -> Result<Arc<Self>> {
        if lengths.is_empty() || lengths.len() > 2 || lengths.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "manifold dimension must be 1 or 2 with matching grid (got {} lengths, {} grid axes)",
                lengths.len(),
                grid.len()
            )));
        }
        for (a, &len) in lengths.iter().enumerate() {
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "axis {a} length must be positive and finite (got {len})"
                )));
            }
        }
        for (a, &n) in grid.iter().enumerate() {
            if n < 8 {
                return Err(Error::InvalidParameter(format!(
                    "axis {a} needs at least 8 grid points (got {n})"
                )));
            }
        }
        let n_nodes: usize = grid.iter().product();
        let spacing: Vec<f64> = lengths
            .iter()
            .zip(&grid)
            .map(|(&l, &n)| l / n as f64)
            .collect();

        // Tabulate φ.
        let mut phi = vec![0.0; n_nodes];
        match &weight {
            Weight::Zero => {}
            Weight::SinFirstCoord { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(Error::InvalidParameter(
                        "weight amplitude must be finite".into(),
                    ));
                }
                let omega = 2.0 * std::f64::consts::PI / lengths[0];
                let nx = grid[0];
                for (i, p) in phi.iter_mut().enumerate() {
                    let ix = i % nx;
                    *p = amplitude * (omega * ix as f64 * spacing[0]).sin();
                }
            }
            Weight::Custom(values) => {
                if values.len() != n_nodes {
                    return Err(Error::InvalidParameter(format!(
                        "custom weight has {} samples but the grid has {} nodes",
                        values.len(),
                        n_nodes
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "custom weight contains a non-finite sample".into(),
                    ));
                }
                phi.copy_from_slice(values);
            }
        }
        let phi_constant = phi.windows(2).all(|w| w[0] == w[1]);
        let node_w: Vec<f64> = phi.iter().map(|&p| (-p).exp()).collect();

        let mut shell = Self {
            lengths,
            grid,
            spacing,
            weight,
            phi,
            node_w,
            edge_w: Vec::new(),
            phi_constant,
        };
        let mut edge_w = Vec::with_capacity(shell.dim());
        for axis in 0..shell.dim() {
            let w: Vec<f64> = (0..n_nodes)
                .map(|i| {
                    let j = shell.shift(i, axis, 1);
                    (-0.5 * (shell.phi[i] + shell.phi[j])).exp()
                })
                .collect();
            edge_w.push(w);
        }
        shell.edge_w = edge_w;
        Ok(Arc::new(shell))
    }

    /// Same geometry (lengths, grid, weight samples) with every axis
    /// resolution doubled. Used by the refinement-confirmation policy;
    /// only closed-form weights can be resampled.
    pub fn refined(&self) -> Result<Arc<Self>> {
        match &self.weight {
            Weight::Custom(_) => Err(Error::Unsupported(
                "cannot refine a manifold with custom weight samples".into(),
            )),
            w => Self::new(
                self.lengths.clone(),
                self.grid.iter().map(|&n| 2 * n).collect(),
                w.clone(),
            ),
        }
    }

    /// Spatial dimension (1 or 2).
    #[inline]
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Total number of grid nodes.
    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.phi.len()
    }

    /// Per-axis node counts.
    #[inline]
    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    /// Per-axis side lengths.
    #[inline]
    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Per-axis grid spacings `h_a`.
    #[inline]
    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Volume element of a single grid cell, `Π_a h_a`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// The weight function this manifold was built from.
    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// `φ` samples.
    #[inline]
    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `e^{−φ}` at each node.
    #[inline]
    pub fn node_weight(&self) -> &[f64] {
        &self.node_w
    }

    /// Staggered edge weights along `axis`; entry `i` belongs to the edge
    /// from node `i` to its forward neighbour.
    #[inline]
    pub fn edge_weight(&self, axis: usize) -> &[f64] {
        &self.edge_w[axis]
    }

    /// True when `φ` is constant (all samples bitwise equal).
    #[inline]
    pub fn phi_is_constant(&self) -> bool {
        self.phi_constant
    }

    /// Cartesian coordinates of node `i`.
    pub fn coords(&self, i: usize) -> Vec<f64> {
        match self.dim() {
            1 => vec![i as f64 * self.spacing[0]],
            _ => {
                let nx = self.grid[0];
                vec![
                    (i % nx) as f64 * self.spacing[0],
                    (i / nx) as f64 * self.spacing[1],
                ]
            }
        }
    }

    /// Index of the node `delta` steps from `i` along `axis`, with
    /// periodic wraparound. `delta` is small (±1, ±2 in practice).
    #[inline]
    pub fn shift(&self, i: usize, axis: usize, delta: isize) -> usize {
        #[inline]
        fn wrap(j: usize, delta: isize, n: usize) -> usize {
            // n ≥ 8 ≫ |delta|, so a single add of `n` keeps things in range.
            (j + n).wrapping_add_signed(delta) % n
        }
        match self.dim() {
            1 => wrap(i, delta, self.grid[0]),
            _ => {
                let nx = self.grid[0];
                match axis {
                    0 => (i / nx) * nx + wrap(i % nx, delta, nx),
                    _ => wrap(i / nx, delta, self.grid[1]) * nx + i % nx,
                }
            }
        }
    }

    /// Structural geometry equality: same dimension, lengths, grid and
    /// weight samples. Fields on manifolds that are not the same geometry
    /// must never be combined.
    pub fn same_geometry(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b)
            || (a.lengths == b.lengths && a.grid == b.grid && a.phi == b.phi)
    }
}
