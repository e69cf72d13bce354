//! Global differential-Harnack (Li–Yau type) bounds for the pressure of
//! the weighted porous-medium / fast-diffusion flow, plus the evolution
//! inequality they rest on and a feasibility functional for the fast
//! regime.
//!
//! The central quantity is the Harnack field `F = |∇v|²/v − α·v_t/v` built
//! from the pressure `v`. In the porous regime (`p > 1`, `v > 0`) the
//! bounds say `F ≤ RHS`; in the fast regime (`p < 1`, `v < 0`) they say
//! `−F ≤ RHS`. Each bound family fixes its own rule for `α` and for the
//! right-hand side; all depend on the dimensional constant
//! `ã = m(p−1)/(m(p−1)+2)`, the nonlinearity scale `M = p·max u^{p−1}`,
//! and the curvature constant `K` with `Ric_φ^m ≥ −K` (always measured by
//! [`bakry_emery`], never user-asserted).

use crate::curvature::bakry_emery;
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::field::ScalarField;
use crate::ops::{dot_field, gradient, grad_norm_sq, witten_laplacian};
use crate::solver::Trajectory;
use serde::{Deserialize, Serialize};

/// Earliest time at which bound margins are evaluated by default; the
/// `1/t` terms amplify discretisation error below it.
pub const DEFAULT_T_CHECK_MIN: f64 = 0.01;

/// Below `x = MKt < SERIES_SWITCH`, the hyperbolic-α bound is evaluated
/// through its Taylor expansion: the direct `cosh·sinh − x` form loses all
/// significant digits as `x → 0` (and is `0/0` at `K = 0`).
const SERIES_SWITCH: f64 = 1e-4;

/// The seven bound families, named by regime and by how α is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    /// Porous regime, constant `α > 1`:
    /// `F ≤ α²/(α−1)·ãMK + ãα²/t`.
    PorousAlpha,
    /// Porous regime, constant `α > 1`, halved curvature coefficient:
    /// `F ≤ α²/(2(α−1))·ãMK + ãα²/t`.
    PorousAlphaSharp,
    /// Fast regime, `α = 1`, needs `Ric_φ^m ≥ 0`: `−F ≤ −ã/t`.
    FastAlphaLimit,
    /// Fast regime, constant `α ∈ (0,1)`:
    /// `−F ≤ (α²/(2(1−α)) + 2(1−ã))MK + (1−α−ã)/t`.
    FastAlpha,
    /// Porous regime, `α(t) = e^{2MKt}`: `F ≤ ã·α(t)²/t`.
    PorousExpAlpha,
    /// Porous regime, hyperbolic schedule
    /// `α(t) = 1 + (cosh x·sinh x − x)/sinh²x` with `x = MKt`:
    /// `F ≤ ãMK(coth x + 1)`.
    PorousCothAlpha,
    /// Porous regime, linear schedule `α(t) = 1 + (2/3)MKt`:
    /// `F ≤ ã/t + ãMK + (ã/3)(MK)²t`.
    PorousLinearAlpha,
}

impl EstimateKind {
    pub const ALL: [EstimateKind; 7] = [
        EstimateKind::PorousAlpha,
        EstimateKind::PorousAlphaSharp,
        EstimateKind::FastAlphaLimit,
        EstimateKind::FastAlpha,
        EstimateKind::PorousExpAlpha,
        EstimateKind::PorousCothAlpha,
        EstimateKind::PorousLinearAlpha,
    ];

    /// Stable kebab-case identifier (used in reports and scenario files).
    pub fn id(self) -> &'static str {
        match self {
            EstimateKind::PorousAlpha => "porous-alpha",
            EstimateKind::PorousAlphaSharp => "porous-alpha-sharp",
            EstimateKind::FastAlphaLimit => "fast-alpha-limit",
            EstimateKind::FastAlpha => "fast-alpha",
            EstimateKind::PorousExpAlpha => "porous-exp-alpha",
            EstimateKind::PorousCothAlpha => "porous-coth-alpha",
            EstimateKind::PorousLinearAlpha => "porous-linear-alpha",
        }
    }

    /// True for the `p > 1` families (margin `RHS − F`), false for the
    /// `p < 1` families (margin `RHS + F`).
    pub fn is_porous(self) -> bool {
        !matches!(
            self,
            EstimateKind::FastAlphaLimit | EstimateKind::FastAlpha
        )
    }

    /// True when the family takes a free constant α (as opposed to a
    /// built-in schedule α(t) or the fixed α = 1).
    pub fn takes_alpha(self) -> bool {
        matches!(
            self,
            EstimateKind::PorousAlpha | EstimateKind::PorousAlphaSharp | EstimateKind::FastAlpha
        )
    }
}

impl std::fmt::Display for EstimateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for EstimateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EstimateKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| Error::Parse(format!("unknown estimate kind '{s}'")))
    }
}

/// Dimensional constant `ã = d(p−1)/(d(p−1)+2)` for a dimension parameter
/// `d` (usually `m`; pass the base dimension `n` for the comparison
/// value). Negative exactly when `p ∈ (1−2/d, 1)`.
///
/// # Errors
///
/// `p = 1 − 2/d` makes the denominator vanish; rejected with a relative
/// threshold so the FP-boundary case (e.g. `p = 0.8`, `d = 10`) errors
/// too.
pub fn dimensional_constant(p: f64, d: f64) -> Result<f64> {
    if !(p.is_finite() && d.is_finite() && d > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dimensional constant needs finite p and d > 0 (got p = {p}, d = {d})"
        )));
    }
    let num = d * (p - 1.0);
    let den = num + 2.0;
    if den.abs() <= 1e-12 * (num.abs() + 2.0) {
        return Err(Error::InvalidParameter(format!(
            "p = {p} sits on the singular line p = 1 − 2/d for d = {d}"
        )));
    }
    Ok(num / den)
}

/// Nonlinearity scale `M = p · max u^{p−1}` over all snapshots with
/// `t ≤ window_end`. Equals `(p−1)·max v` in the porous regime and
/// `(1−p)·max(−v)` in the fast regime; always positive.
pub fn nonlinearity_scale(traj: &Trajectory, window_end: f64) -> Result<f64> {
    let p = traj.p();
    let mut max_pow = f64::NEG_INFINITY;
    for k in 0..traj.len() {
        if traj.times()[k] > window_end {
            break;
        }
        max_pow = max_pow.max(traj.u(k)?.map(|u| u.powf(p - 1.0)).max());
    }
    if !max_pow.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "empty window: no snapshots with t <= {window_end}"
        )));
    }
    Ok(p * max_pow)
}

/// Harnack field `F = |∇v|²/v − α·v_t/v` at interior snapshot `k`, with
/// `v_t` from a centred difference of stored pressures. This is the
/// porous orientation; fast-regime checks bound `−F`.
pub fn harnack_quantity(traj: &Trajectory, k: usize, alpha: f64) -> Result<ScalarField> {
    if !traj.is_interior(k) {
        return Err(Error::IndexOutOfRange(format!(
            "harnack quantity needs an interior snapshot (k = {k}, len = {})",
            traj.len()
        )));
    }
    let v_prev = traj.pressure(k - 1)?;
    let v_here = traj.pressure(k)?;
    let v_next = traj.pressure(k + 1)?;
    let dt2 = traj.times()[k + 1] - traj.times()[k - 1];
    let gn2 = grad_norm_sq(&v_here);
    let n = v_here.len();
    let vals = map_indexed(n, |i| {
        let v = v_here.values()[i];
        let vt = (v_next.values()[i] - v_prev.values()[i]) / dt2;
        gn2.values()[i] / v - alpha * vt / v
    });
    Ok(ScalarField::from_values_unchecked(traj.manifold(), vals))
}

/// The α used on the left-hand side and the right-hand side value of a
/// bound at one time.
#[derive(Debug, Clone, Copy)]
pub struct AlphaBound {
    /// α entering `F` at this time (the schedule value for time-dependent
    /// families, the given constant otherwise, 1 for the α-limit family).
    pub alpha: f64,
    /// Right-hand side: porous families bound `F`, fast families bound
    /// `−F`.
    pub bound: f64,
}

fn require_alpha(kind: EstimateKind, alpha: Option<f64>) -> Result<f64> {
    match alpha {
        Some(a) if a.is_finite() => Ok(a),
        Some(a) => Err(Error::InvalidParameter(format!(
            "{kind}: alpha must be finite (got {a})"
        ))),
        None => Err(Error::InvalidParameter(format!(
            "{kind}: this family needs an explicit alpha"
        ))),
    }
}

fn reject_alpha(kind: EstimateKind, alpha: Option<f64>) -> Result<()> {
    if alpha.is_some() {
        return Err(Error::InvalidParameter(format!(
            "{kind}: alpha is determined by the family, do not supply one"
        )));
    }
    Ok(())
}

/// Evaluate a bound family's α and right-hand side at time `t`.
///
/// Inputs are the dimensional constant `ã`, the nonlinearity scale `M`,
/// the curvature constant `K ≥ 0`, the free α (only for the families that
/// take one) and the time. Regime coherence (`ã > 0` for porous families,
/// `ã < 0` for fast ones) is enforced here so the pure formulas cannot be
/// quietly evaluated outside their hypotheses.
pub fn bound_rhs(
    kind: EstimateKind,
    a_tilde: f64,
    big_m: f64,
    k: f64,
    alpha: Option<f64>,
    t: f64,
) -> Result<AlphaBound> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bound evaluation needs t > 0 (got {t})"
        )));
    }
    if !(big_m.is_finite() && big_m > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "nonlinearity scale must be positive (got {big_m})"
        )));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "curvature constant must be non-negative (got {k})"
        )));
    }
    if kind.is_porous() && !(a_tilde > 0.0 && a_tilde < 1.0) {
        return Err(Error::RegimeMismatch(format!(
            "{kind}: porous families need ã ∈ (0,1) (got ã = {a_tilde}, i.e. p ≤ 1)"
        )));
    }
    if !kind.is_porous() && !(a_tilde < 0.0) {
        return Err(Error::RegimeMismatch(format!(
            "{kind}: fast families need ã < 0, i.e. p ∈ (1−2/m, 1) (got ã = {a_tilde})"
        )));
    }

    let mk = big_m * k;
    match kind {
        EstimateKind::PorousAlpha => {
            let a = require_alpha(kind, alpha)?;
            if a <= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{kind}: needs alpha > 1 (got {a})"
                )));
            }
            Ok(AlphaBound {
                alpha: a,
                bound: a * a / (a - 1.0) * a_tilde * mk + a_tilde * a * a / t,
            })
        }
        EstimateKind::PorousAlphaSharp => {
            let a = require_alpha(kind, alpha)?;
            if a <= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "{kind}: needs alpha > 1 (got {a})"
                )));
            }
            Ok(AlphaBound {
                alpha: a,
                bound: a * a / (2.0 * (a - 1.0)) * a_tilde * mk + a_tilde * a * a / t,
            })
        }
        EstimateKind::FastAlphaLimit => {
            reject_alpha(kind, alpha)?;
            if k > 0.0 {
                return Err(Error::Unsupported(format!(
                    "{kind}: the global fast-diffusion bound with alpha = 1 needs \
                     Ric_φ^m ≥ 0, but K = {k} > 0"
                )));
            }
            Ok(AlphaBound {
                alpha: 1.0,
                bound: -a_tilde / t,
            })
        }
        EstimateKind::FastAlpha => {
            let a = require_alpha(kind, alpha)?;
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "{kind}: needs alpha ∈ (0,1) (got {a})"
                )));
            }
            Ok(AlphaBound {
                alpha: a,
                bound: (a * a / (2.0 * (1.0 - a)) + 2.0 * (1.0 - a_tilde)) * mk
                    + (1.0 - a - a_tilde) / t,
            })
        }
        EstimateKind::PorousExpAlpha => {
            reject_alpha(kind, alpha)?;
            let a = (2.0 * mk * t).exp();
            Ok(AlphaBound {
                alpha: a,
                bound: a_tilde * a * a / t,
            })
        }
        EstimateKind::PorousCothAlpha => {
            reject_alpha(kind, alpha)?;
            let x = mk * t;
            if x < SERIES_SWITCH {
                // exact analytic limit at MK = 0, Taylor tail otherwise
                Ok(AlphaBound {
                    alpha: 1.0 + 2.0 / 3.0 * x,
                    bound: a_tilde / t + a_tilde * mk + a_tilde * mk * x / 3.0,
                })
            } else {
                let (sh, ch) = (x.sinh(), x.cosh());
                Ok(AlphaBound {
                    alpha: 1.0 + (ch * sh - x) / (sh * sh),
                    bound: a_tilde * mk * (ch / sh + 1.0),
                })
            }
        }
        EstimateKind::PorousLinearAlpha => {
            reject_alpha(kind, alpha)?;
            let x = mk * t;
            Ok(AlphaBound {
                alpha: 1.0 + 2.0 / 3.0 * x,
                bound: a_tilde / t + a_tilde * mk + a_tilde / 3.0 * mk * x,
            })
        }
    }
}

/// Parameters of one bound check over a trajectory.
#[derive(Debug, Clone)]
pub struct EstimateParams {
    pub kind: EstimateKind,
    /// Dimension parameter `m ≥ n` of the curvature tensor and of `ã`.
    pub m: f64,
    /// Free α for the families that take one; must be `None` otherwise.
    pub alpha: Option<f64>,
    /// Margins are only evaluated at snapshots with `t ≥ t_check_min`.
    pub t_check_min: f64,
    /// Margin tolerance; `None` selects `1e−3 × |the 1/t term of the
    /// bound at t_check_min|`.
    pub tol: Option<f64>,
}

impl EstimateParams {
    pub fn new(kind: EstimateKind, m: f64) -> Self {
        Self {
            kind,
            m,
            alpha: None,
            t_check_min: DEFAULT_T_CHECK_MIN,
            tol: None,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = Some(alpha);
        self
    }
}

/// Margin data for one snapshot.
#[derive(Debug, Clone, Copy)]
pub struct SnapshotMargin {
    pub t: f64,
    /// α in force at this time.
    pub alpha: f64,
    /// Right-hand side at this time.
    pub bound: f64,
    /// `min_i (RHS − F_i)` (porous) or `min_i (RHS + F_i)` (fast).
    pub min_margin: f64,
    pub argmin_node: usize,
}

/// Outcome of checking one bound family along a trajectory.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub kind: EstimateKind,
    pub a_tilde: f64,
    /// Nonlinearity scale over the full checked window.
    pub big_m: f64,
    /// Curvature constant actually used (0 when the tensor is
    /// non-negative up to round-off).
    pub k: f64,
    pub lambda_min: f64,
    pub tol: f64,
    pub per_snapshot: Vec<SnapshotMargin>,
    pub min_margin: f64,
    pub argmin_t: f64,
    pub argmin_node: usize,
    /// `min_margin ≥ −tol`.
    pub pass: bool,
}

fn default_tolerance(kind: EstimateKind, a_tilde: f64, alpha: Option<f64>, t_min: f64) -> f64 {
    // 1e−3 of the 1/t (time-singular) term of the bound at the earliest
    // checked time — strictly smaller than 1e−3 of the full bound, so it
    // never loosens with K.
    let time_term = match kind {
        EstimateKind::PorousAlpha | EstimateKind::PorousAlphaSharp => {
            let a = alpha.unwrap_or(1.0);
            a_tilde * a * a / t_min
        }
        EstimateKind::FastAlpha => (1.0 - alpha.unwrap_or(0.5) - a_tilde) / t_min,
        EstimateKind::FastAlphaLimit
        | EstimateKind::PorousExpAlpha
        | EstimateKind::PorousCothAlpha
        | EstimateKind::PorousLinearAlpha => a_tilde / t_min,
    };
    1e-3 * time_term.abs()
}

/// Check one bound family over every interior snapshot with
/// `t ≥ t_check_min`.
///
/// The curvature constant is measured from the manifold via
/// [`bakry_emery`]; the nonlinearity scale is the running
/// `M = p·max u^{p−1}` over `[0, t]`, so each snapshot is checked against
/// the tightest admissible instance of its bound.
pub fn check_estimate(traj: &Trajectory, params: &EstimateParams) -> Result<EstimateReport> {
    let p = traj.p();
    if params.kind.is_porous() && p <= 1.0 {
        return Err(Error::RegimeMismatch(format!(
            "{}: porous family checked against a fast trajectory (p = {p})",
            params.kind
        )));
    }
    if !params.kind.is_porous() && p >= 1.0 {
        return Err(Error::RegimeMismatch(format!(
            "{}: fast family checked against a porous trajectory (p = {p})",
            params.kind
        )));
    }
    if !(params.t_check_min.is_finite() && params.t_check_min >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "t_check_min must be a non-negative finite time (got {})",
            params.t_check_min
        )));
    }
    if let Some(tol) = params.tol {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be non-negative (got {tol})"
            )));
        }
    }

    let a_tilde = dimensional_constant(p, params.m)?;
    let curvature = bakry_emery(traj.manifold(), params.m)?;
    let k_eff = if curvature.nonneg { 0.0 } else { curvature.k };

    let tol = params
        .tol
        .unwrap_or_else(|| default_tolerance(params.kind, a_tilde, params.alpha, params.t_check_min));

    let mut running_max_pow = traj.u(0)?.map(|u| u.powf(p - 1.0)).max();
    let mut per_snapshot = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut argmin_t = f64::NAN;
    let mut argmin_node = 0;
    let mut big_m_final = p * running_max_pow;

    for k in 1..traj.len().saturating_sub(1) {
        running_max_pow = running_max_pow.max(traj.u(k)?.map(|u| u.powf(p - 1.0)).max());
        let t = traj.times()[k];
        if t < params.t_check_min {
            continue;
        }
        let big_m = p * running_max_pow;
        big_m_final = big_m;
        let ab = bound_rhs(params.kind, a_tilde, big_m, k_eff, params.alpha, t)?;
        let f = harnack_quantity(traj, k, ab.alpha)?;
        let sign = if params.kind.is_porous() { -1.0 } else { 1.0 };
        let mut snap_min = f64::INFINITY;
        let mut snap_arg = 0;
        for (i, &fi) in f.values().iter().enumerate() {
            let margin = ab.bound + sign * fi;
            if margin < snap_min {
                snap_min = margin;
                snap_arg = i;
            }
        }
        per_snapshot.push(SnapshotMargin {
            t,
            alpha: ab.alpha,
            bound: ab.bound,
            min_margin: snap_min,
            argmin_node: snap_arg,
        });
        if snap_min < min_margin {
            min_margin = snap_min;
            argmin_t = t;
            argmin_node = snap_arg;
        }
    }

    if per_snapshot.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no interior snapshots with t >= {} to check (trajectory spans {:?})",
            params.t_check_min,
            (traj.times().first(), traj.times().last()),
        )));
    }

    Ok(EstimateReport {
        kind: params.kind,
        a_tilde,
        big_m: big_m_final,
        k: k_eff,
        lambda_min: curvature.lambda_min,
        tol,
        pass: min_margin >= -tol,
        per_snapshot,
        min_margin,
        argmin_t,
        argmin_node,
    })
}

/// A time-dependent coefficient and its derivative at one time.
#[derive(Debug, Clone, Copy)]
pub struct TimeDep {
    pub value: f64,
    pub derivative: f64,
}

impl TimeDep {
    /// A constant-in-time coefficient.
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            derivative: 0.0,
        }
    }
}

/// Oriented residual of the evolution inequality behind all seven bounds.
#[derive(Debug)]
pub struct HarnackResidual {
    /// `RHS − L(F)` in the porous regime, `L(F) − RHS` in the fast
    /// regime; non-negative in the continuum, `≥ −O(h² + dt)` discretely.
    pub oriented: ScalarField,
    /// `max(‖L(F)‖_∞, ‖RHS‖_∞)` — the natural magnitude to measure the
    /// residual against.
    pub scale: f64,
}

/// Residual of the evolution inequality for the extended Harnack field
/// `F = |∇v|²/v − α(t)·v_t/v − φ(t)` under `L = ∂_t − (p−1)v·Δ_φ`:
///
/// `L(F) ≤ −(1/ã)[(p−1)Δ_φv]² − 2(p−1)·Ric_φ^m(∇v,∇v) + 2p·∇v·∇F
///         + (1−α)(v_t/v)² − α′·v_t/v − φ′`
///
/// in the porous regime, with the inequality reversed in the fast regime.
/// `alpha` and `varphi` supply the coefficient value and derivative at any
/// time (use [`TimeDep::constant`] for the constant-α families with
/// `varphi` ≡ 0). Needs two interior snapshots on each side of `k`, i.e.
/// `k ∈ [2, len−3]`.
pub fn harnack_inequality_residual(
    traj: &Trajectory,
    k: usize,
    m: f64,
    alpha: impl Fn(f64) -> TimeDep,
    varphi: impl Fn(f64) -> TimeDep,
) -> Result<HarnackResidual> {
    if k < 2 || k + 2 >= traj.len() {
        return Err(Error::IndexOutOfRange(format!(
            "evolution residual needs k in [2, len−3] (k = {k}, len = {})",
            traj.len()
        )));
    }
    let p = traj.p();
    let a_tilde = dimensional_constant(p, m)?;
    let curvature = bakry_emery(traj.manifold(), m)?;
    let n = traj.manifold().n_nodes();

    // F with its full time dependence at k−1, k, k+1
    let f_at = |j: usize| -> Result<ScalarField> {
        let t = traj.times()[j];
        let a = alpha(t).value;
        let base = harnack_quantity(traj, j, a)?;
        let shift = varphi(t).value;
        Ok(base.map(|x| x - shift))
    };
    let f_prev = f_at(k - 1)?;
    let f_here = f_at(k)?;
    let f_next = f_at(k + 1)?;

    let v_prev = traj.pressure(k - 1)?;
    let v_here = traj.pressure(k)?;
    let v_next = traj.pressure(k + 1)?;
    let dt2 = traj.times()[k + 1] - traj.times()[k - 1];

    let lap_v = witten_laplacian(&v_here);
    let lap_f = witten_laplacian(&f_here);
    let grad_v = gradient(&v_here);
    let grad_f = gradient(&f_here);
    let transport = dot_field(&grad_v, &grad_f);

    let td_alpha = alpha(traj.times()[k]);
    let td_varphi = varphi(traj.times()[k]);
    let porous = p > 1.0;

    let mut lf_inf = 0.0f64;
    let mut rhs_inf = 0.0f64;
    let vals: Vec<f64> = (0..n)
        .map(|i| {
            let v = v_here.values()[i];
            let vt = (v_next.values()[i] - v_prev.values()[i]) / dt2;
            let lf = (f_next.values()[i] - f_prev.values()[i]) / dt2
                - (p - 1.0) * v * lap_f.values()[i];
            let q = (p - 1.0) * lap_v.values()[i];
            let ric = curvature.tensor.quad_form(i, &grad_v);
            let rhs = -q * q / a_tilde - 2.0 * (p - 1.0) * ric
                + 2.0 * p * transport.values()[i]
                + (1.0 - td_alpha.value) * (vt / v) * (vt / v)
                - td_alpha.derivative * vt / v
                - td_varphi.derivative;
            lf_inf = lf_inf.max(lf.abs());
            rhs_inf = rhs_inf.max(rhs.abs());
            if porous {
                rhs - lf
            } else {
                lf - rhs
            }
        })
        .collect();

    Ok(HarnackResidual {
        oriented: ScalarField::from_values_unchecked(traj.manifold(), vals),
        scale: lf_inf.max(rhs_inf),
    })
}

/// Feasibility functional for the fast-regime constant-α bound:
///
/// `A(ε₁,ε₂) = [1 − ã(1−α)] − (1+ε₂)²(1−ã)²(1−α) / ((1−ε₁)(1−α−ã))`.
///
/// The bound's derivation needs `A > 0` for some admissible `(ε₁, ε₂)`;
/// this evaluates the formula so callers can probe the region. Pure
/// arithmetic in `ã` — no regime gate beyond `ã` being defined, so the
/// singular configuration `α + ã = 1` is reachable and rejected.
pub fn fast_alpha_feasibility(p: f64, m: f64, alpha: f64, eps1: f64, eps2: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "feasibility functional needs alpha ∈ (0,1) (got {alpha})"
        )));
    }
    for (name, e) in [("eps1", eps1), ("eps2", eps2)] {
        if !(e > 0.0 && e < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "feasibility functional needs {name} ∈ (0,1) (got {e})"
            )));
        }
    }
    let a_tilde = dimensional_constant(p, m)?;
    let den = 1.0 - alpha - a_tilde;
    if den.abs() <= 1e-12 * (1.0 + alpha.abs() + a_tilde.abs()) {
        return Err(Error::InvalidParameter(format!(
            "feasibility functional is singular at alpha + ã = 1 (alpha = {alpha}, ã = {a_tilde})"
        )));
    }
    Ok(1.0 - a_tilde * (1.0 - alpha)
        - (1.0 + eps2).powi(2) * (1.0 - a_tilde).powi(2) * (1.0 - alpha)
            / ((1.0 - eps1) * den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{Manifold, Weight};
    use crate::solver::{solve, SolverConfig, StepSize};
    use std::f64::consts::TAU;

    fn porous_traj(n: usize, weight: Weight, p: f64, dt: f64, t_end: f64) -> Trajectory {
        let m = Manifold::circle(TAU, n, weight).unwrap();
        let u0 = ScalarField::from_fn(&m, |x| 1.0 + 0.5 * x[0].cos());
        let mut cfg = SolverConfig::new(p, t_end);
        cfg.step = StepSize::Fixed(dt);
        solve(&u0, &cfg).unwrap()
    }

    #[test]
    fn dimensional_constant_oracles() {
        assert_eq!(dimensional_constant(2.0, 4.0).unwrap(), 2.0 / 3.0);
        assert!((dimensional_constant(0.9, 10.0).unwrap() - -1.0).abs() < 1e-12);
        // boundary of the fast range: denominator vanishes (up to FP)
        assert!(dimensional_constant(0.8, 10.0).is_err());
        // base-dimension comparison value
        assert_eq!(dimensional_constant(2.0, 1.0).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn nonlinearity_scale_oracles() {
        let m = Manifold::circle(TAU, 32, Weight::Zero).unwrap();
        // u ≡ 1, p = 2: M = (p−1)·max v = 1·2 = 2
        let one = ScalarField::constant(&m, 1.0);
        let mut cfg = SolverConfig::new(2.0, 1e-3);
        cfg.step = StepSize::Fixed(1e-3);
        let traj = solve(&one, &cfg).unwrap();
        assert!((nonlinearity_scale(&traj, 1.0).unwrap() - 2.0).abs() < 1e-15);

        // u ≡ 4, p = 1/2: v ≡ −1, M = (1−p)·max(−v) = 1/4
        let four = ScalarField::constant(&m, 4.0);
        let mut cfg = SolverConfig::new(0.5, 1e-3);
        cfg.step = StepSize::Fixed(1e-3);
        let traj = solve(&four, &cfg).unwrap();
        let big_m = nonlinearity_scale(&traj, 1.0).unwrap();
        assert!((big_m - 0.25).abs() < 1e-15);
        let v = traj.pressure(0).unwrap();
        assert!((big_m - 0.5 * v.map(|x| -x).max()).abs() < 1e-15);

        // max u = 2, p = 2: M = p·(max u)^{p−1} = 4 at t = 0
        let bump = ScalarField::from_fn(&m, |x| 1.5 + 0.5 * x[0].cos());
        let mut cfg = SolverConfig::new(2.0, 1e-4);
        cfg.step = StepSize::Fixed(1e-4);
        let traj = solve(&bump, &cfg).unwrap();
        let big_m = nonlinearity_scale(&traj, 0.0).unwrap();
        assert!((big_m - 4.0).abs() < 1e-14, "M = {big_m}");
        assert!(nonlinearity_scale(&traj, -1.0).is_err());
    }

    #[test]
    fn bound_oracles_by_substitution() {
        // constant-α porous: ã = 2/3, M = 1, K = 0, α = 2, t = 1 → 8/3
        let ab = bound_rhs(EstimateKind::PorousAlpha, 2.0 / 3.0, 1.0, 0.0, Some(2.0), 1.0)
            .unwrap();
        assert!((ab.bound - 8.0 / 3.0).abs() < 1e-15);
        assert_eq!(ab.alpha, 2.0);

        // exponential schedule collapses at K = 0: α = 1, bound = ã/t
        let ab = bound_rhs(EstimateKind::PorousExpAlpha, 2.0 / 3.0, 1.0, 0.0, None, 0.5).unwrap();
        assert_eq!(ab.alpha, 1.0);
        assert!((ab.bound - 4.0 / 3.0).abs() < 1e-15);

        // linear schedule: ã = 2/3, M = 2, K = 1, t = 1/2 → φ = 28/9, α = 5/3
        let ab = bound_rhs(
            EstimateKind::PorousLinearAlpha,
            2.0 / 3.0,
            2.0,
            1.0,
            None,
            0.5,
        )
        .unwrap();
        assert!((ab.bound - 28.0 / 9.0).abs() < 1e-14, "φ = {}", ab.bound);
        assert!((ab.alpha - 5.0 / 3.0).abs() < 1e-15);

        // hyperbolic schedule at K = 0 is the exact analytic limit
        let ab = bound_rhs(EstimateKind::PorousCothAlpha, 2.0 / 3.0, 1.0, 0.0, None, 0.25).unwrap();
        assert_eq!(ab.alpha, 1.0);
        assert_eq!(ab.bound, (2.0 / 3.0) / 0.25);

        // fast α-limit: ã = −1 → bound = 1/t, needs K = 0
        let ab = bound_rhs(EstimateKind::FastAlphaLimit, -1.0, 0.25, 0.0, None, 2.0).unwrap();
        assert_eq!(ab.bound, 0.5);
        assert!(matches!(
            bound_rhs(EstimateKind::FastAlphaLimit, -1.0, 0.25, 0.3, None, 2.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn hyperbolic_schedule_series_is_continuous_and_consistent() {
        let (a_tilde, t) = (2.0 / 3.0, 1.0);
        // tiny MK: bound → ã/t with an O(ãMK) correction
        for mk in [0.0, 1e-12, 1e-8] {
            let ab =
                bound_rhs(EstimateKind::PorousCothAlpha, a_tilde, 1.0, mk, None, t).unwrap();
            assert!((ab.bound - a_tilde / t).abs() <= 2.0 * a_tilde * mk + 1e-15);
            assert!((ab.alpha - 1.0).abs() <= mk);
        }
        // the two evaluation paths agree at the switch point
        for x in [0.99e-4f64, 1.01e-4] {
            let direct = {
                let (sh, ch) = (x.sinh(), x.cosh());
                a_tilde * x * (ch / sh + 1.0) / t
            };
            let series = a_tilde / t + a_tilde * x / t + a_tilde * x * x / (3.0 * t);
            assert!(
                ((direct - series) / direct).abs() < 1e-10,
                "x = {x}: {direct} vs {series}"
            );
        }
    }

    #[test]
    fn halved_coefficient_bound_dominated_by_plain_bound() {
        for alpha in [1.1, 1.5, 2.0, 3.0, 10.0] {
            for a_tilde in [0.1, 2.0 / 3.0, 0.9] {
                for mk in [0.0, 0.5, 3.0] {
                    for t in [0.01, 1.0, 7.0] {
                        let plain =
                            bound_rhs(EstimateKind::PorousAlpha, a_tilde, 1.0, mk, Some(alpha), t)
                                .unwrap();
                        let sharp = bound_rhs(
                            EstimateKind::PorousAlphaSharp,
                            a_tilde,
                            1.0,
                            mk,
                            Some(alpha),
                            t,
                        )
                        .unwrap();
                        assert!(sharp.bound <= plain.bound);
                    }
                }
            }
        }
    }

    #[test]
    fn schedule_bounds_match_small_time_combined_bound() {
        // both schedules stay below ã/t + 2ãMK while MKt ≤ 3
        let a_tilde = 2.0 / 3.0;
        for kind in [EstimateKind::PorousCothAlpha, EstimateKind::PorousLinearAlpha] {
            for mk in [1e-6, 0.1, 1.0, 2.0] {
                for t in [0.01, 0.5, 1.0, 1.4] {
                    if mk * t > 3.0 {
                        continue;
                    }
                    let ab = bound_rhs(kind, a_tilde, 1.0, mk, None, t).unwrap();
                    let combined = a_tilde / t + 2.0 * a_tilde * mk;
                    assert!(
                        ab.bound <= combined + 1e-12,
                        "{kind} at MK = {mk}, t = {t}: {} vs {combined}",
                        ab.bound
                    );
                }
            }
        }
    }

    #[test]
    fn regime_gates_on_bounds() {
        // porous family with fast ã
        assert!(bound_rhs(EstimateKind::PorousAlpha, -1.0, 1.0, 0.0, Some(2.0), 1.0).is_err());
        // fast family with porous ã
        assert!(bound_rhs(EstimateKind::FastAlpha, 2.0 / 3.0, 1.0, 0.0, Some(0.5), 1.0).is_err());
        // α out of range
        assert!(bound_rhs(EstimateKind::PorousAlpha, 0.5, 1.0, 0.0, Some(1.0), 1.0).is_err());
        assert!(bound_rhs(EstimateKind::FastAlpha, -1.0, 1.0, 0.0, Some(1.0), 1.0).is_err());
        // schedule families reject a supplied α
        assert!(bound_rhs(EstimateKind::PorousExpAlpha, 0.5, 1.0, 0.0, Some(2.0), 1.0).is_err());
        // missing α where required
        assert!(bound_rhs(EstimateKind::PorousAlpha, 0.5, 1.0, 0.0, None, 1.0).is_err());
    }

    #[test]
    fn harnack_quantity_matches_brute_force_stencil() {
        let traj = porous_traj(64, Weight::Zero, 2.0, 1e-3, 4e-3);
        let k = 2;
        let alpha = 1.7;
        let f = harnack_quantity(&traj, k, alpha).unwrap();
        // independent evaluation: v = 2u for p = 2, centred differences
        // written out literally
        let n = 64;
        let h = TAU / n as f64;
        let v = |j: usize, i: usize| 2.0 * traj.u(j).unwrap().values()[i];
        for i in [0usize, 17, 40] {
            let gv = (v(k, (i + 1) % n) - v(k, (i + n - 1) % n)) / (2.0 * h);
            let vt = (v(k + 1, i) - v(k - 1, i)) / (traj.times()[k + 1] - traj.times()[k - 1]);
            let expect = gv * gv / v(k, i) - alpha * vt / v(k, i);
            assert!(
                (f.values()[i] - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                "node {i}: {} vs {expect}",
                f.values()[i]
            );
        }
        assert!(harnack_quantity(&traj, 0, alpha).is_err());
    }

    #[test]
    fn harnack_quantity_is_affine_in_alpha() {
        let traj = porous_traj(32, Weight::SinFirstCoord { amplitude: 0.3 }, 2.0, 1e-3, 5e-3);
        let k = 2;
        let f1 = harnack_quantity(&traj, k, 1.0).unwrap();
        let f2 = harnack_quantity(&traj, k, 2.0).unwrap();
        let f3 = harnack_quantity(&traj, k, 3.0).unwrap();
        let scale = f1.norm_inf().max(f3.norm_inf());
        for i in 0..f1.len() {
            let mid = 0.5 * (f1.values()[i] + f3.values()[i]);
            assert!((mid - f2.values()[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn alpha_one_collapses_to_laplacian_identity() {
        // |∇v|²/v − v_t/v = −(p−1)Δ_φv up to O(dt + h²)
        let traj = porous_traj(128, Weight::Zero, 2.0, 1e-5, 2e-3);
        let k = traj.len() / 2;
        let f = harnack_quantity(&traj, k, 1.0).unwrap();
        let lap_v = witten_laplacian(&traj.pressure(k).unwrap());
        let p = traj.p();
        let scale = lap_v.norm_inf();
        let mut worst = 0.0f64;
        for i in 0..f.len() {
            worst = worst.max((f.values()[i] + (p - 1.0) * lap_v.values()[i]).abs());
        }
        assert!(worst <= 1e-2 * scale, "defect {worst:.3e} vs scale {scale:.3e}");
    }

    #[test]
    fn constant_solution_margins_equal_bound() {
        let m = Manifold::circle(TAU, 32, Weight::Zero).unwrap();
        let one = ScalarField::constant(&m, 1.0);
        let mut cfg = SolverConfig::new(2.0, 0.05);
        cfg.step = StepSize::Fixed(1e-3);
        let traj = solve(&one, &cfg).unwrap();
        let params = EstimateParams::new(EstimateKind::PorousAlpha, 4.0).with_alpha(2.0);
        let rep = check_estimate(&traj, &params).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.k, 0.0);
        assert!((rep.a_tilde - 2.0 / 3.0).abs() < 1e-15);
        // F ≡ 0 exactly on the constant solution, so margin = bound
        for snap in &rep.per_snapshot {
            let expect = rep.a_tilde * 4.0 / snap.t;
            assert!(
                (snap.min_margin - expect).abs() <= 1e-13 * expect,
                "t = {}: {} vs {expect}",
                snap.t,
                snap.min_margin
            );
        }
        // min margin sits at the latest checked time (bound ~ 1/t)
        assert!((rep.argmin_t - rep.per_snapshot.last().unwrap().t).abs() < 1e-15);
    }

    #[test]
    fn fast_alpha_limit_needs_nonnegative_curvature() {
        let m = Manifold::circle(TAU, 64, Weight::SinFirstCoord { amplitude: 0.3 }).unwrap();
        let u0 = ScalarField::from_fn(&m, |x| 1.0 + 0.2 * x[0].cos());
        let mut cfg = SolverConfig::new(0.9, 0.03);
        cfg.step = StepSize::Fixed(1e-4);
        let traj = solve(&u0, &cfg).unwrap();
        let params = EstimateParams::new(EstimateKind::FastAlphaLimit, 10.0);
        assert!(matches!(
            check_estimate(&traj, &params),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn regime_mismatch_between_family_and_trajectory() {
        let porous = porous_traj(32, Weight::Zero, 2.0, 1e-3, 0.02);
        let params = EstimateParams::new(EstimateKind::FastAlpha, 3.0).with_alpha(0.5);
        assert!(matches!(
            check_estimate(&porous, &params),
            Err(Error::RegimeMismatch(_))
        ));
        let m = Manifold::circle(TAU, 32, Weight::Zero).unwrap();
        let u0 = ScalarField::from_fn(&m, |x| 1.0 + 0.2 * x[0].cos());
        let mut cfg = SolverConfig::new(0.9, 0.02);
        cfg.step = StepSize::Fixed(1e-3);
        let fast = solve(&u0, &cfg).unwrap();
        let params = EstimateParams::new(EstimateKind::PorousAlpha, 10.0).with_alpha(2.0);
        assert!(matches!(
            check_estimate(&fast, &params),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn evolution_residual_vanishes_on_constant_solution() {
        let m = Manifold::circle(TAU, 32, Weight::Zero).unwrap();
        let one = ScalarField::constant(&m, 1.0);
        let mut cfg = SolverConfig::new(2.0, 8e-3);
        cfg.step = StepSize::Fixed(1e-3);
        let traj = solve(&one, &cfg).unwrap();
        let res = harnack_inequality_residual(
            &traj,
            3,
            4.0,
            |_| TimeDep::constant(2.0),
            |_| TimeDep::constant(0.0),
        )
        .unwrap();
        assert_eq!(res.oriented.norm_inf(), 0.0);
        assert_eq!(res.scale, 0.0);
        // index window is [2, len−3]
        assert!(harnack_inequality_residual(
            &traj,
            1,
            4.0,
            |_| TimeDep::constant(2.0),
            |_| TimeDep::constant(0.0)
        )
        .is_err());
    }

    #[test]
    fn evolution_residual_nonnegative_on_smooth_porous_run() {
        let traj = porous_traj(128, Weight::SinFirstCoord { amplitude: 0.3 }, 2.0, 2e-5, 2e-2);
        let k = traj.len() / 2;
        let res = harnack_inequality_residual(
            &traj,
            k,
            3.0,
            |_| TimeDep::constant(2.0),
            |_| TimeDep::constant(0.0),
        )
        .unwrap();
        let min = res.oriented.min();
        assert!(
            min >= -5e-2 * res.scale,
            "min residual {min:.3e} vs scale {:.3e}",
            res.scale
        );
    }

    #[test]
    fn evolution_residual_fast_orientation() {
        let m = Manifold::circle(TAU, 128, Weight::Zero).unwrap();
        let u0 = ScalarField::from_fn(&m, |x| 1.0 + 0.2 * x[0].cos());
        let mut cfg = SolverConfig::new(0.9, 2e-2);
        cfg.step = StepSize::Fixed(2e-5);
        let traj = solve(&u0, &cfg).unwrap();
        let k = traj.len() / 2;
        let res = harnack_inequality_residual(
            &traj,
            k,
            10.0,
            |_| TimeDep::constant(0.5),
            |_| TimeDep::constant(0.0),
        )
        .unwrap();
        let min = res.oriented.min();
        assert!(
            min >= -5e-2 * res.scale,
            "min residual {min:.3e} vs scale {:.3e}",
            res.scale
        );
    }

    #[test]
    fn feasibility_functional_oracle() {
        // ã = −1 (p = 0.9, m = 10), α = 0.5, ε₁ = ε₂ = 0.1:
        // A = 1.5 − (1.21·4·0.5)/(0.9·1.5) = 1.5 − 2.42/1.35 = −79/270
        let a = fast_alpha_feasibility(0.9, 10.0, 0.5, 0.1, 0.1).unwrap();
        assert!((a - (-79.0 / 270.0)).abs() < 1e-14, "A = {a}");

        // ε → 0 limit formula, approached numerically
        let a_tilde = -1.0f64;
        let alpha = 0.5;
        let limit = 1.0 - a_tilde * (1.0 - alpha)
            - (1.0 - a_tilde).powi(2) * (1.0 - alpha) / (1.0 - alpha - a_tilde);
        let near = fast_alpha_feasibility(0.9, 10.0, alpha, 1e-9, 1e-9).unwrap();
        assert!((near - limit).abs() < 1e-7);

        // singular configuration α + ã = 1 (reachable with porous ã)
        assert!(fast_alpha_feasibility(1.5, 4.0, 0.5, 0.1, 0.1).is_err());
        // parameter validation
        assert!(fast_alpha_feasibility(0.9, 10.0, 1.5, 0.1, 0.1).is_err());
        assert!(fast_alpha_feasibility(0.9, 10.0, 0.5, 1.0, 0.1).is_err());
    }

    #[test]
    fn kind_ids_round_trip() {
        for kind in EstimateKind::ALL {
            let parsed: EstimateKind = kind.id().parse().unwrap();
            assert_eq!(parsed, kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.id()));
        }
        assert!("porous-beta".parse::<EstimateKind>().is_err());
    }
}
