//! Numerical verification toolkit for weighted porous-medium and
//! fast-diffusion flows on flat closed manifolds.
//!
//! The central object is the weighted (drift) Laplacian
//! `Δ_φ f = Δf − ∇φ·∇f`, which is self-adjoint in `L²(dμ)` for the
//! weighted measure `dμ = e^{−φ} dv`. This crate discretises `Δ_φ` on
//! uniform periodic grids over the circle and the flat 2-torus in
//! divergence form, so that self-adjointness, the kernel of constants and
//! `∫ Δ_φ f dμ = 0` hold to round-off rather than to discretisation order.
//!
//! On top of the operator kernel sit:
//!
//! * an explicit solver for `u_t = Δ_φ(u^p)` (`p > 0`, `p ≠ 1`),
//! * pointwise gradient-bound checks for the pressure
//!   `v = p/(p−1) · u^{p−1}` in both the porous (`p > 1`) and fast
//!   (`p < 1`) regimes, with constant and time-dependent tightening
//!   parameters,
//! * Nash- and W-style entropy monitors with closed-form rates and
//!   monotonicity gates,
//! * a scenario harness (TOML input, CSV/JSON output) exposed through the
//!   `wpme` command-line binary.
//!
//! Everything is deterministic: randomised test fields are seeded, and all
//! reductions are summed in a fixed order, so identical inputs produce
//! identical outputs bit for bit.

pub mod curvature;
pub mod entropy;
pub mod error;
pub mod estimates;
pub mod exec;
pub mod field;
pub mod manifold;
pub mod ops;
pub mod report;
pub mod run;
pub mod scenario;
pub mod solver;
pub mod trig;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use manifold::{Manifold, Weight};
