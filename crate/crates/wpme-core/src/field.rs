//! Grid fields: scalar, vector and symmetric-tensor values attached to a
//! [`Manifold`].
//!
//! Fields are plain `Vec<f64>` payloads plus an `Arc` handle to their
//! manifold; binary operations check geometric compatibility and fail
//! closed on mismatch.

use crate::error::{Error, Result};
use crate::manifold::Manifold;
use std::sync::Arc;

/// One `f64` per grid node.
#[derive(Debug, Clone)]
pub struct ScalarField {
    manifold: Arc<Manifold>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap existing per-node samples. The sample count must match the
    /// grid and every sample must be finite.
    pub fn from_values(manifold: &Arc<Manifold>, values: Vec<f64>) -> Result<Self> {
        if values.len() != manifold.n_nodes() {
            return Err(Error::InvalidParameter(format!(
                "field has {} samples but the grid has {} nodes",
                values.len(),
                manifold.n_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "field contains a non-finite sample".into(),
            ));
        }
        Ok(Self::from_values_unchecked(manifold, values))
    }

    /// Internal constructor for values produced by our own kernels (already
    /// length-correct; finiteness is the caller's concern, e.g. the solver
    /// checks it per step).
    pub(crate) fn from_values_unchecked(manifold: &Arc<Manifold>, values: Vec<f64>) -> Self {
        Self {
            manifold: Arc::clone(manifold),
            values,
        }
    }

    /// Sample a coordinate function onto the grid.
    pub fn from_fn(manifold: &Arc<Manifold>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..manifold.n_nodes())
            .map(|i| f(&manifold.coords(i)))
            .collect();
        Self::from_values_unchecked(manifold, values)
    }

    /// Constant field.
    pub fn constant(manifold: &Arc<Manifold>, c: f64) -> Self {
        Self::from_values_unchecked(manifold, vec![c; manifold.n_nodes()])
    }

    #[inline]
    pub fn manifold(&self) -> &Arc<Manifold> {
        &self.manifold
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map into a new field on the same manifold.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values_unchecked(&self.manifold, self.values.iter().map(|&v| f(v)).collect())
    }

    /// `max_i |f_i|`.
    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Minimum sample value.
    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
    }

    /// Maximum sample value.
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v))
    }

    /// Fail unless `other` lives on the same geometry.
    pub fn check_same_geometry(&self, other: &ScalarField, what: &str) -> Result<()> {
        if Manifold::same_geometry(&self.manifold, &other.manifold) {
            Ok(())
        } else {
            Err(Error::ManifoldMismatch(what.into()))
        }
    }
}

/// One `f64` per node per axis, stored component-major:
/// `comps[axis * n_nodes + node]`.
#[derive(Debug, Clone)]
pub struct VectorField {
    manifold: Arc<Manifold>,
    comps: Vec<f64>,
}

impl VectorField {
    pub(crate) fn from_comps(manifold: &Arc<Manifold>, comps: Vec<f64>) -> Self {
        debug_assert_eq!(comps.len(), manifold.dim() * manifold.n_nodes());
        Self {
            manifold: Arc::clone(manifold),
            comps,
        }
    }

    #[inline]
    pub fn manifold(&self) -> &Arc<Manifold> {
        &self.manifold
    }

    /// Component `axis` at `node`.
    #[inline]
    pub fn comp(&self, node: usize, axis: usize) -> f64 {
        self.comps[axis * self.manifold.n_nodes() + node]
    }

    /// All samples of one component.
    #[inline]
    pub fn axis(&self, axis: usize) -> &[f64] {
        let n = self.manifold.n_nodes();
        &self.comps[axis * n..(axis + 1) * n]
    }

    /// `|ξ|²` at `node`.
    #[inline]
    pub fn norm_sq(&self, node: usize) -> f64 {
        (0..self.manifold.dim())
            .map(|a| {
                let c = self.comp(node, a);
                c * c
            })
            .sum()
    }

    /// `ξ·η` at `node`.
    #[inline]
    pub fn dot(&self, other: &VectorField, node: usize) -> f64 {
        (0..self.manifold.dim())
            .map(|a| self.comp(node, a) * other.comp(node, a))
            .sum()
    }

    /// `max_{i,a} |ξ_a(i)|`.
    pub fn norm_inf(&self) -> f64 {
        self.comps.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Symmetric 1×1 or 2×2 tensor per node. Layout is entry-major:
/// dimension 1 stores `[xx]`, dimension 2 stores `[xx, yy, xy]`, each
/// entry occupying a contiguous block of `n_nodes` samples.
#[derive(Debug, Clone)]
pub struct SymTensorField {
    manifold: Arc<Manifold>,
    entries: Vec<f64>,
}

impl SymTensorField {
    pub(crate) fn from_entries(manifold: &Arc<Manifold>, entries: Vec<f64>) -> Self {
        debug_assert_eq!(
            entries.len(),
            Self::entries_per_node(manifold.dim()) * manifold.n_nodes()
        );
        Self {
            manifold: Arc::clone(manifold),
            entries,
        }
    }

    #[inline]
    pub fn entries_per_node(dim: usize) -> usize {
        match dim {
            1 => 1,
            _ => 3,
        }
    }

    #[inline]
    pub fn manifold(&self) -> &Arc<Manifold> {
        &self.manifold
    }

    /// Entry `(a, b)` of the tensor at `node`.
    #[inline]
    pub fn entry(&self, node: usize, a: usize, b: usize) -> f64 {
        let n = self.manifold.n_nodes();
        match self.manifold.dim() {
            1 => self.entries[node],
            _ => match (a, b) {
                (0, 0) => self.entries[node],
                (1, 1) => self.entries[n + node],
                _ => self.entries[2 * n + node],
            },
        }
    }

    /// Trace at `node`.
    #[inline]
    pub fn trace(&self, node: usize) -> f64 {
        match self.manifold.dim() {
            1 => self.entry(node, 0, 0),
            _ => self.entry(node, 0, 0) + self.entry(node, 1, 1),
        }
    }

    /// Squared Frobenius norm `Σ_{a,b} T_{ab}²` at `node` (off-diagonal
    /// entries counted twice).
    #[inline]
    pub fn frobenius_sq(&self, node: usize) -> f64 {
        match self.manifold.dim() {
            1 => {
                let t = self.entry(node, 0, 0);
                t * t
            }
            _ => {
                let xx = self.entry(node, 0, 0);
                let yy = self.entry(node, 1, 1);
                let xy = self.entry(node, 0, 1);
                xx * xx + yy * yy + 2.0 * xy * xy
            }
        }
    }

    /// Quadratic form `T(ξ, ξ)` at `node`.
    #[inline]
    pub fn quad_form(&self, node: usize, xi: &VectorField) -> f64 {
        match self.manifold.dim() {
            1 => {
                let x = xi.comp(node, 0);
                self.entry(node, 0, 0) * x * x
            }
            _ => {
                let x = xi.comp(node, 0);
                let y = xi.comp(node, 1);
                self.entry(node, 0, 0) * x * x
                    + self.entry(node, 1, 1) * y * y
                    + 2.0 * self.entry(node, 0, 1) * x * y
            }
        }
    }

    /// Smallest eigenvalue at `node`, by closed form (the tensors here are
    /// 1×1 or symmetric 2×2, so no iterative eigensolver is needed).
    #[inline]
    pub fn min_eigenvalue(&self, node: usize) -> f64 {
        match self.manifold.dim() {
            1 => self.entry(node, 0, 0),
            _ => {
                let xx = self.entry(node, 0, 0);
                let yy = self.entry(node, 1, 1);
                let xy = self.entry(node, 0, 1);
                let mid = 0.5 * (xx + yy);
                let rad = (0.25 * (xx - yy) * (xx - yy) + xy * xy).sqrt();
                mid - rad
            }
        }
    }

    /// `max` over nodes and entries of `|T_{ab}|`.
    pub fn norm_inf(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Weight;
    use std::f64::consts::TAU;

    #[test]
    fn scalar_field_validation() {
        let m = Manifold::circle(TAU, 8, Weight::Zero).unwrap();
        assert!(ScalarField::from_values(&m, vec![1.0; 7]).is_err());
        assert!(ScalarField::from_values(&m, vec![f64::NAN; 8]).is_err());
        let f = ScalarField::from_values(&m, (0..8).map(|i| i as f64).collect()).unwrap();
        assert_eq!(f.norm_inf(), 7.0);
        assert_eq!(f.min(), 0.0);
        assert_eq!(f.max(), 7.0);
    }

    #[test]
    fn geometry_mismatch_detected() {
        let a = Manifold::circle(TAU, 8, Weight::Zero).unwrap();
        let b = Manifold::circle(TAU, 16, Weight::Zero).unwrap();
        let fa = ScalarField::constant(&a, 1.0);
        let fb = ScalarField::constant(&b, 1.0);
        assert!(fa.check_same_geometry(&fb, "test").is_err());
        // structurally identical geometry on a distinct Arc is accepted
        let a2 = Manifold::circle(TAU, 8, Weight::Zero).unwrap();
        let fa2 = ScalarField::constant(&a2, 2.0);
        assert!(fa.check_same_geometry(&fa2, "test").is_ok());
    }

    #[test]
    fn sym_tensor_closed_form_eigenvalues() {
        let m = Manifold::torus([TAU, TAU], [8, 8], Weight::Zero).unwrap();
        let n = m.n_nodes();
        // T = [[2, 1], [1, 2]] everywhere: eigenvalues 1 and 3.
        let mut entries = vec![0.0; 3 * n];
        entries[..n].fill(2.0);
        entries[n..2 * n].fill(2.0);
        entries[2 * n..].fill(1.0);
        let t = SymTensorField::from_entries(&m, entries);
        assert!((t.min_eigenvalue(0) - 1.0).abs() < 1e-15);
        assert!((t.trace(0) - 4.0).abs() < 1e-15);
        assert!((t.frobenius_sq(0) - 10.0).abs() < 1e-15);
    }
}
