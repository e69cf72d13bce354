//! Nash-type and W-type entropies along porous-medium / fast-diffusion
//! trajectories, their closed-form time derivatives, the dissipation
//! identity behind them, and the fast-regime upper bound on the W-rate.
//!
//! Definitions (discrete throughout; `v` is the pressure, `uv` the
//! nodewise product, `ã = m(p−1)/(m(p−1)+2)`, `c = m(p−1)+2`):
//!
//! - `N = −t^ã ∫ uv dμ`
//! - `W = t^{ã+1} ∫ (p|∇v|²/v − (ã+1)/t) uv dμ`, which is `d/dt entry [t·N]`
//! - `dN/dt = −t^ã ∫ ((p−1)Δ_φv + ã/t) uv dμ`
//! - `dW/dt = −2(p−1)t^{ã+1} ∫ {|∇²v + g/(ct)|² + (∇φ·∇v − (m−n)/(ct))²/(m−n)
//!            + Ric_φ^m(∇v,∇v)} uv dμ − 2t^{ã+1} ∫ ((p−1)Δ_φv + ã/t)² uv dμ`
//!
//! With `Ric_φ^m ≥ 0` both rates are non-positive in the porous regime;
//! in the fast regime the W-rate is dominated by an explicitly computable
//! upper bound whenever `(p, ε)` sit in the admissible window.

use crate::curvature::bakry_emery;
use crate::error::{Error, Result};
use crate::estimates::dimensional_constant;
use crate::field::ScalarField;
use crate::manifold::Manifold;
use crate::ops::{
    grad_norm_sq, gradient, hessian, weighted_integral, witten_laplacian,
};
use crate::solver::Trajectory;
use std::sync::Arc;

/// `t^e`, rejecting the singular `0^e` for negative exponents (reachable
/// for fast-regime `ã < 0` at the initial snapshot).
fn time_power(t: f64, e: f64) -> Result<f64> {
    if t == 0.0 && e < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "entropy is singular at t = 0 for exponent {e} < 0; check from t > 0"
        )));
    }
    Ok(t.powf(e))
}

fn uv_field(traj: &Trajectory, k: usize) -> Result<(ScalarField, ScalarField)> {
    let u = traj.u(k)?;
    let v = traj.pressure(k)?;
    let vals = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a * b)
        .collect();
    let uv = ScalarField::from_values_unchecked(traj.manifold(), vals);
    Ok((v, uv))
}

/// Nash-type entropy `N = −t^ã ∫ uv dμ` at snapshot `k`.
pub fn nash_entropy(traj: &Trajectory, k: usize, m: f64) -> Result<f64> {
    let a_tilde = dimensional_constant(traj.p(), m)?;
    let t = traj.times()[check_index(traj, k)?];
    let (_, uv) = uv_field(traj, k)?;
    Ok(-time_power(t, a_tilde)? * weighted_integral(&uv))
}

/// W-type entropy `W = t^{ã+1} ∫ (p|∇v|²/v − (ã+1)/t) uv dμ` at snapshot
/// `k` (`t > 0` required: the integrand carries `1/t`).
pub fn w_entropy(traj: &Trajectory, k: usize, m: f64) -> Result<f64> {
    let a_tilde = dimensional_constant(traj.p(), m)?;
    let t = traj.times()[check_index(traj, k)?];
    if t <= 0.0 {
        return Err(Error::InvalidParameter(
            "the W entropy carries a 1/t term; evaluate at t > 0".into(),
        ));
    }
    let p = traj.p();
    let (v, uv) = uv_field(traj, k)?;
    let gn2 = grad_norm_sq(&v);
    let mut integrand = Vec::with_capacity(uv.len());
    for i in 0..uv.len() {
        integrand.push((p * gn2.values()[i] / v.values()[i] - (a_tilde + 1.0) / t) * uv.values()[i]);
    }
    let field = ScalarField::from_values_unchecked(traj.manifold(), integrand);
    Ok(time_power(t, a_tilde + 1.0)? * weighted_integral(&field))
}

/// Closed-form entropy rate `dN/dt = −t^ã ∫ ((p−1)Δ_φv + ã/t) uv dμ`.
pub fn nash_entropy_rate(traj: &Trajectory, k: usize, m: f64) -> Result<f64> {
    let a_tilde = dimensional_constant(traj.p(), m)?;
    let t = traj.times()[check_index(traj, k)?];
    if t <= 0.0 {
        return Err(Error::InvalidParameter(
            "the N rate carries a 1/t term; evaluate at t > 0".into(),
        ));
    }
    let p = traj.p();
    let (v, uv) = uv_field(traj, k)?;
    let lap_v = witten_laplacian(&v);
    let mut integrand = Vec::with_capacity(uv.len());
    for i in 0..uv.len() {
        integrand.push(((p - 1.0) * lap_v.values()[i] + a_tilde / t) * uv.values()[i]);
    }
    let field = ScalarField::from_values_unchecked(traj.manifold(), integrand);
    Ok(-time_power(t, a_tilde)? * weighted_integral(&field))
}

fn check_index(traj: &Trajectory, k: usize) -> Result<usize> {
    if k >= traj.len() {
        return Err(Error::IndexOutOfRange(format!(
            "snapshot {k} of {}",
            traj.len()
        )));
    }
    Ok(k)
}

/// Closed-form W-rate (see the module docs). Needs `m > n`, or `m = n`
/// with constant `φ`, in which case the `(m−n)`-denominator term is
/// dropped.
pub fn w_entropy_rate(traj: &Trajectory, k: usize, m: f64) -> Result<f64> {
    let p = traj.p();
    let a_tilde = dimensional_constant(p, m)?;
    let t = traj.times()[check_index(traj, k)?];
    if t <= 0.0 {
        return Err(Error::InvalidParameter(
            "the W rate carries 1/t terms; evaluate at t > 0".into(),
        ));
    }
    let manifold = traj.manifold();
    let n = manifold.dim() as f64;
    let curvature = bakry_emery(manifold, m)?; // enforces the m ≥ n rules
    let c = m * (p - 1.0) + 2.0;
    let ct = c * t;

    let (v, uv) = uv_field(traj, k)?;
    let grad_v = gradient(&v);
    let hess_v = hessian(&v);
    let lap_v = witten_laplacian(&v);
    let phi = ScalarField::from_values_unchecked(manifold, manifold.phi().to_vec());
    let grad_phi = gradient(&phi);

    let dim = manifold.dim() as f64;
    let n_nodes = manifold.n_nodes();
    let mut geom = Vec::with_capacity(n_nodes);
    let mut quad = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        // |∇²v + g/(ct)|² with g the identity in grid coordinates
        let mut term = hess_v.frobenius_sq(i) + 2.0 * hess_v.trace(i) / ct + dim / (ct * ct);
        if m > n {
            let b = grad_phi.dot(&grad_v, i) - (m - n) / ct;
            term += b * b / (m - n);
        }
        term += curvature.tensor.quad_form(i, &grad_v);
        geom.push(term * uv.values()[i]);
        let a = (p - 1.0) * lap_v.values()[i] + a_tilde / t;
        quad.push(a * a * uv.values()[i]);
    }
    let geom = ScalarField::from_values_unchecked(manifold, geom);
    let quad = ScalarField::from_values_unchecked(manifold, quad);
    let t_pow = time_power(t, a_tilde + 1.0)?;
    Ok(-2.0 * (p - 1.0) * t_pow * weighted_integral(&geom) - 2.0 * t_pow * weighted_integral(&quad))
}

/// Admissibility window of the fast-regime W-rate bound:
/// `ε ≥ m−n` and `1 − 1/(n+ε) ≤ p ≤ 1 − (m−n)/(mε)`, compared with a
/// `1e−12` relative slack so exact-boundary parameter choices are not
/// lost to rounding.
pub fn fast_window_contains(p: f64, m: f64, n: f64, eps: f64) -> bool {
    let slack = 1e-12;
    if !(eps.is_finite() && eps > 0.0) {
        return false;
    }
    if eps - (m - n) < -slack * (1.0 + (m - n).abs()) {
        return false;
    }
    let lo = 1.0 - 1.0 / (n + eps);
    let hi = 1.0 - (m - n) / (m * eps);
    p >= lo - slack * (1.0 + lo.abs()) && p <= hi + slack * (1.0 + hi.abs())
}

/// Fast-regime upper bound for the W-rate:
///
/// `dW/dt ≤ 2t^{ã+1} ∫ {(1−p)Ric_φ^m(∇v,∇v)
///   + [(1−n(1−p))/(n(1−p)) − ε/n]·((p−1)Δ_φv + ã/t)²
///   + [m(1−p)/(n(m−n)) − 1/(nε)]·(∇φ·∇v − (m−n)/(ct))²} uv dμ`.
///
/// Both bracketed coefficients are non-negative exactly on the admissible
/// `(p, ε)` window, and `uv < 0`, so the bound is `≤ 0` whenever
/// `Ric_φ^m ≥ 0`. For `m = n` (constant `φ`) the second bracket is
/// dropped.
pub fn w_entropy_rate_bound_fast(traj: &Trajectory, k: usize, m: f64, eps: f64) -> Result<f64> {
    let p = traj.p();
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::RegimeMismatch(format!(
            "the fast W-rate bound needs p ∈ (0,1) (got {p})"
        )));
    }
    let manifold = traj.manifold();
    let n = manifold.dim() as f64;
    if !fast_window_contains(p, m, n, eps) {
        return Err(Error::InvalidParameter(format!(
            "(p, ε) = ({p}, {eps}) outside the admissible window: need ε ≥ m−n = {} and \
             1−1/(n+ε) = {} ≤ p ≤ 1−(m−n)/(mε) = {}",
            m - n,
            1.0 - 1.0 / (n + eps),
            1.0 - (m - n) / (m * eps)
        )));
    }
    let a_tilde = dimensional_constant(p, m)?;
    let t = traj.times()[check_index(traj, k)?];
    if t <= 0.0 {
        return Err(Error::InvalidParameter(
            "the W-rate bound carries 1/t terms; evaluate at t > 0".into(),
        ));
    }
    let curvature = bakry_emery(manifold, m)?;
    let c = m * (p - 1.0) + 2.0;
    let ct = c * t;

    let (v, uv) = uv_field(traj, k)?;
    let grad_v = gradient(&v);
    let lap_v = witten_laplacian(&v);
    let phi = ScalarField::from_values_unchecked(manifold, manifold.phi().to_vec());
    let grad_phi = gradient(&phi);

    let coef_a = (1.0 - n * (1.0 - p)) / (n * (1.0 - p)) - eps / n;
    let coef_b = if m > n {
        m * (1.0 - p) / (n * (m - n)) - 1.0 / (n * eps)
    } else {
        0.0
    };

    let n_nodes = manifold.n_nodes();
    let mut integrand = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let ric = curvature.tensor.quad_form(i, &grad_v);
        let a = (p - 1.0) * lap_v.values()[i] + a_tilde / t;
        let mut val = (1.0 - p) * ric + coef_a * a * a;
        if m > n {
            let b = grad_phi.dot(&grad_v, i) - (m - n) / ct;
            val += coef_b * b * b;
        }
        integrand.push(val * uv.values()[i]);
    }
    let field = ScalarField::from_values_unchecked(manifold, integrand);
    Ok(2.0 * time_power(t, a_tilde + 1.0)? * weighted_integral(&field))
}

/// Three expressions for the rate of `∫ uv dμ` at interior snapshot `k`:
/// the centred finite difference of the integral, the Laplacian form
/// `(p−1)∫(Δ_φv)uv dμ`, and the gradient form `−p∫|∇v|²u dμ`. All agree
/// in the continuum; discretely the two spatial forms agree to `O(h²)`
/// and the finite difference to `O(dt + h²)` on Euler trajectories.
pub fn nash_rate_identity(traj: &Trajectory, k: usize) -> Result<(f64, f64, f64)> {
    if !traj.is_interior(k) {
        return Err(Error::IndexOutOfRange(format!(
            "rate identity needs an interior snapshot (k = {k}, len = {})",
            traj.len()
        )));
    }
    let p = traj.p();
    let mass = |j: usize| -> Result<f64> {
        let (_, uv) = uv_field(traj, j)?;
        Ok(weighted_integral(&uv))
    };
    let fd = (mass(k + 1)? - mass(k - 1)?) / (traj.times()[k + 1] - traj.times()[k - 1]);

    let (v, uv) = uv_field(traj, k)?;
    let lap_v = witten_laplacian(&v);
    let mut m_int = Vec::with_capacity(uv.len());
    for i in 0..uv.len() {
        m_int.push(lap_v.values()[i] * uv.values()[i]);
    }
    let middle = (p - 1.0)
        * weighted_integral(&ScalarField::from_values_unchecked(traj.manifold(), m_int));

    let u = traj.u(k)?;
    let gn2 = grad_norm_sq(&v);
    let mut g_int = Vec::with_capacity(uv.len());
    for i in 0..uv.len() {
        g_int.push(gn2.values()[i] * u.values()[i]);
    }
    let right =
        -p * weighted_integral(&ScalarField::from_values_unchecked(traj.manifold(), g_int));
    Ok((fd, middle, right))
}

/// Two expressions for the rate of `∫(Δ_φv)uv dμ` at interior snapshot
/// `k`: the centred finite difference, and the closed form
/// `2∫[(p−1)(Δ_φv)² + |∇²v|² + ∇²φ(∇v,∇v)] uv dμ` (the unaugmented
/// `Ric_φ = ∇²φ` on a flat base).
pub fn dissipation_rate_identity(traj: &Trajectory, k: usize) -> Result<(f64, f64)> {
    if !traj.is_interior(k) {
        return Err(Error::IndexOutOfRange(format!(
            "dissipation identity needs an interior snapshot (k = {k}, len = {})",
            traj.len()
        )));
    }
    let p = traj.p();
    let manifold = traj.manifold();
    let dissipation = |j: usize| -> Result<f64> {
        let (v, uv) = uv_field(traj, j)?;
        let lap_v = witten_laplacian(&v);
        let mut vals = Vec::with_capacity(uv.len());
        for i in 0..uv.len() {
            vals.push(lap_v.values()[i] * uv.values()[i]);
        }
        Ok(weighted_integral(&ScalarField::from_values_unchecked(
            manifold, vals,
        )))
    };
    let fd =
        (dissipation(k + 1)? - dissipation(k - 1)?) / (traj.times()[k + 1] - traj.times()[k - 1]);

    let (v, uv) = uv_field(traj, k)?;
    let lap_v = witten_laplacian(&v);
    let grad_v = gradient(&v);
    let hess_v = hessian(&v);
    let phi = ScalarField::from_values_unchecked(manifold, manifold.phi().to_vec());
    let hess_phi = hessian(&phi);
    let mut vals = Vec::with_capacity(uv.len());
    for i in 0..uv.len() {
        let lw = lap_v.values()[i];
        vals.push(
            ((p - 1.0) * lw * lw + hess_v.frobenius_sq(i) + hess_phi.quad_form(i, &grad_v))
                * uv.values()[i],
        );
    }
    let formula =
        2.0 * weighted_integral(&ScalarField::from_values_unchecked(manifold, vals));
    Ok((fd, formula))
}

/// Entropy time series along a trajectory: values, closed-form rates,
/// centred finite-difference rates, the optional fast bound, and per-time
/// monotonicity flags.
#[derive(Debug, Clone)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    pub n: Vec<f64>,
    pub w: Vec<f64>,
    pub dn_formula: Vec<f64>,
    /// Centred difference of `n`; `NaN` where a neighbour snapshot is
    /// missing.
    pub dn_fd: Vec<f64>,
    pub dw_formula: Vec<f64>,
    pub dw_fd: Vec<f64>,
    /// Fast-regime upper bound on the W-rate; populated only when an `ε`
    /// was supplied.
    pub bound_fast: Vec<Option<f64>>,
    /// `dN ≤ tol` and `dW ≤ tol` with `tol = 1e−8 ×` the window-max
    /// magnitude of the respective rate.
    pub monotone: Vec<bool>,
}

/// Relative threshold defining the per-time monotonicity flags.
pub const MONOTONE_REL_TOL: f64 = 1e-8;

/// Assemble an [`EntropyTrace`] over every snapshot with
/// `t ≥ t_check_min`. Pass `eps` to also evaluate the fast-regime W-rate
/// bound (fast trajectories only; the window is validated).
pub fn entropy_trace(
    traj: &Trajectory,
    m: f64,
    eps: Option<f64>,
    t_check_min: f64,
) -> Result<EntropyTrace> {
    let mut times = Vec::new();
    let mut n_vals = Vec::new();
    let mut w_vals = Vec::new();
    let mut dn_formula = Vec::new();
    let mut dw_formula = Vec::new();
    let mut bound_fast = Vec::new();
    let mut indices = Vec::new();

    for k in 0..traj.len() {
        let t = traj.times()[k];
        if t < t_check_min || t <= 0.0 {
            continue;
        }
        indices.push(k);
        times.push(t);
        n_vals.push(nash_entropy(traj, k, m)?);
        w_vals.push(w_entropy(traj, k, m)?);
        dn_formula.push(nash_entropy_rate(traj, k, m)?);
        dw_formula.push(w_entropy_rate(traj, k, m)?);
        bound_fast.push(match eps {
            Some(e) => Some(w_entropy_rate_bound_fast(traj, k, m, e)?),
            None => None,
        });
    }
    if times.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no snapshots with t >= {t_check_min} to trace"
        )));
    }

    // centred differences of the entropy values themselves, using
    // neighbouring stored snapshots (which may lie before t_check_min)
    let mut dn_fd = vec![f64::NAN; times.len()];
    let mut dw_fd = vec![f64::NAN; times.len()];
    for (row, &k) in indices.iter().enumerate() {
        if !traj.is_interior(k) || traj.times()[k - 1] <= 0.0 {
            continue;
        }
        let dt2 = traj.times()[k + 1] - traj.times()[k - 1];
        dn_fd[row] = (nash_entropy(traj, k + 1, m)? - nash_entropy(traj, k - 1, m)?) / dt2;
        dw_fd[row] = (w_entropy(traj, k + 1, m)? - w_entropy(traj, k - 1, m)?) / dt2;
    }

    let dn_scale = dn_formula.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let dw_scale = dw_formula.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let monotone = dn_formula
        .iter()
        .zip(&dw_formula)
        .map(|(dn, dw)| {
            *dn <= MONOTONE_REL_TOL * dn_scale && *dw <= MONOTONE_REL_TOL * dw_scale
        })
        .collect();

    Ok(EntropyTrace {
        times,
        n: n_vals,
        w: w_vals,
        dn_formula,
        dn_fd,
        dw_formula,
        dw_fd,
        bound_fast,
        monotone,
    })
}

/// Closed-form constant-solution entropies, used as test oracles:
/// on a constant state `u ≡ u₀` every gradient vanishes and
/// `N(t) = −t^ã·I`, `W(t) = −(ã+1)t^ã·I`, `dN = −ãt^{ã−1}·I`,
/// `dW = −ã(ã+1)t^{ã−1}·I` with `I = ∫uv dμ`.
pub fn constant_solution_entropies(
    manifold: &Arc<Manifold>,
    u0: f64,
    p: f64,
    m: f64,
    t: f64,
) -> Result<(f64, f64, f64, f64)> {
    let a_tilde = dimensional_constant(p, m)?;
    let uv = u0 * p / (p - 1.0) * u0.powf(p - 1.0);
    let i = uv * weighted_integral(&ScalarField::constant(manifold, 1.0));
    let tp = time_power(t, a_tilde)?;
    let tm = time_power(t, a_tilde - 1.0)?;
    Ok((
        -tp * i,
        -(a_tilde + 1.0) * tp * i,
        -a_tilde * tm * i,
        -a_tilde * (a_tilde + 1.0) * tm * i,
    ))
}
