//! Scenario files: a flat TOML schema describing manifold, initial data,
//! solver configuration and the list of checks to run. Parsing fails
//! closed — unknown keys, missing required fields, wrong-regime
//! parameters and schema mismatches are all hard errors before any
//! compute starts.

use crate::error::{Error, Result};
use crate::estimates::{EstimateKind, DEFAULT_T_CHECK_MIN};
use crate::field::ScalarField;
use crate::manifold::{Manifold, Weight};
use crate::solver::{Scheme, SolverConfig, StepSize, DEFAULT_CFL_FRACTION};
use crate::trig::TrigPoly;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// The one schema version this build understands.
pub const SCHEMA_VERSION: u32 = 1;

/// Check identifiers that are not bound families.
pub const NON_ESTIMATE_CHECKS: [&str; 6] = [
    "harnack-inequality",
    "pressure-residual",
    "entropy-porous",
    "entropy-fast",
    "nash-rate",
    "dissipation-rate",
];

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    /// Seed for randomized initial data; mandatory when any randomness is
    /// requested, ignored otherwise.
    #[serde(default)]
    pub seed: Option<u64>,
    pub manifold: ManifoldSpec,
    pub initial: InitialSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    /// Directory of the scenario file, for resolving relative paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    /// "circle" or "torus".
    pub kind: String,
    #[serde(default)]
    pub length: Option<f64>,
    #[serde(default)]
    pub lengths: Option<[f64; 2]>,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub grid: Option<[usize; 2]>,
    pub weight: WeightSpec,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    /// "zero" or "sin-first-coord".
    pub kind: String,
    #[serde(default)]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// "constant" | "cosine" | "random-trig" | "file".
    pub kind: String,
    /// constant: the value.
    #[serde(default)]
    pub value: Option<f64>,
    /// cosine, random-trig: additive offset keeping the data positive.
    #[serde(default)]
    pub base: Option<f64>,
    /// cosine: amplitude of the single mode.
    #[serde(default)]
    pub amplitude: Option<f64>,
    /// cosine: per-axis mode numbers.
    #[serde(default)]
    pub modes: Option<Vec<u32>>,
    /// random-trig: largest mode per axis.
    #[serde(default)]
    pub max_mode: Option<u32>,
    /// random-trig: coefficient scale.
    #[serde(default)]
    pub scale: Option<f64>,
    /// random-trig: per-mode geometric decay.
    #[serde(default)]
    pub decay: Option<f64>,
    /// file: whitespace-separated node values, row-major.
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub p: f64,
    /// "euler" (default) or "rk4".
    #[serde(default)]
    pub scheme: Option<String>,
    /// Fixed step; mutually exclusive with `cfl_fraction`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Automatic step as a fraction of the stability bound.
    #[serde(default)]
    pub cfl_fraction: Option<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
    #[serde(default)]
    pub positivity_floor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// A bound-family id or one of [`NON_ESTIMATE_CHECKS`].
    pub id: String,
    #[serde(default)]
    pub m: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Per-check exponent override: the harness solves one trajectory per
    /// distinct effective p, so one scenario can exercise both regimes.
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub t_check_min: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// entropy-fast: the ε of the admissible window.
    #[serde(default)]
    pub eps: Option<f64>,
}

impl CheckSpec {
    pub fn effective_p(&self, solver_p: f64) -> f64 {
        self.p.unwrap_or(solver_p)
    }

    pub fn t_check_min(&self) -> f64 {
        self.t_check_min.unwrap_or(DEFAULT_T_CHECK_MIN)
    }

    /// Parse the id as a bound family, if it is one.
    pub fn estimate_kind(&self) -> Option<EstimateKind> {
        self.id.parse::<EstimateKind>().ok()
    }
}

fn err(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

impl Scenario {
    /// Parse a scenario from TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Scenario =
            toml::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
        sc.validate()?;
        Ok(sc)
    }

    /// Load and validate a scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        let mut sc = Self::from_toml(&text)?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        Ok(sc)
    }

    /// Static validation: schema, structural completeness, and every
    /// check's regime constraints — all before any compute.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "schema version {} not supported (this build reads {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.name.is_empty() {
            return Err(err("scenario name must be non-empty"));
        }
        let dim = self.validate_manifold()?;
        self.validate_initial(dim)?;
        self.solver_config(self.solver.p)?.validate()?;
        for (i, check) in self.checks.iter().enumerate() {
            self.validate_check(check, dim)
                .map_err(|e| err(format!("checks[{i}] ({}): {e}", check.id)))?;
        }
        Ok(())
    }

    fn validate_manifold(&self) -> Result<usize> {
        let m = &self.manifold;
        match m.weight.kind.as_str() {
            "zero" => {
                if m.weight.amplitude.is_some() {
                    return Err(err("weight 'zero' takes no amplitude"));
                }
            }
            "sin-first-coord" => {
                if m.weight.amplitude.is_none() {
                    return Err(err("weight 'sin-first-coord' needs an amplitude"));
                }
            }
            other => return Err(err(format!("unknown weight kind '{other}'"))),
        }
        match m.kind.as_str() {
            "circle" => {
                if m.length.is_none() || m.nodes.is_none() {
                    return Err(err("circle manifold needs 'length' and 'nodes'"));
                }
                if m.lengths.is_some() || m.grid.is_some() {
                    return Err(err("circle manifold takes 'length'/'nodes', not 'lengths'/'grid'"));
                }
                Ok(1)
            }
            "torus" => {
                if m.lengths.is_none() || m.grid.is_none() {
                    return Err(err("torus manifold needs 'lengths' and 'grid'"));
                }
                if m.length.is_some() || m.nodes.is_some() {
                    return Err(err("torus manifold takes 'lengths'/'grid', not 'length'/'nodes'"));
                }
                Ok(2)
            }
            other => Err(err(format!("unknown manifold kind '{other}'"))),
        }
    }

    fn validate_initial(&self, dim: usize) -> Result<()> {
        let i = &self.initial;
        let forbid = |cond: bool, what: &str| {
            if cond {
                Err(err(format!("initial '{}' does not take {what}", i.kind)))
            } else {
                Ok(())
            }
        };
        match i.kind.as_str() {
            "constant" => {
                if i.value.is_none() {
                    return Err(err("constant initial data needs 'value'"));
                }
                forbid(
                    i.base.is_some()
                        || i.amplitude.is_some()
                        || i.modes.is_some()
                        || i.max_mode.is_some()
                        || i.scale.is_some()
                        || i.decay.is_some()
                        || i.path.is_some(),
                    "other fields",
                )
            }
            "cosine" => {
                let modes = i
                    .modes
                    .as_ref()
                    .ok_or_else(|| err("cosine initial data needs 'modes'"))?;
                if modes.len() != dim {
                    return Err(err(format!(
                        "cosine 'modes' must have one entry per axis ({dim})"
                    )));
                }
                if i.base.is_none() || i.amplitude.is_none() {
                    return Err(err("cosine initial data needs 'base' and 'amplitude'"));
                }
                forbid(
                    i.value.is_some()
                        || i.max_mode.is_some()
                        || i.scale.is_some()
                        || i.decay.is_some()
                        || i.path.is_some(),
                    "constant/random/file fields",
                )
            }
            "random-trig" => {
                if i.max_mode.is_none() || i.scale.is_none() || i.decay.is_none() || i.base.is_none()
                {
                    return Err(err(
                        "random-trig initial data needs 'max_mode', 'scale', 'decay', 'base'",
                    ));
                }
                if self.seed.is_none() {
                    return Err(err("randomized initial data needs a scenario 'seed'"));
                }
                forbid(
                    i.value.is_some() || i.amplitude.is_some() || i.modes.is_some() || i.path.is_some(),
                    "constant/cosine/file fields",
                )
            }
            "file" => {
                if i.path.is_none() {
                    return Err(err("file initial data needs 'path'"));
                }
                forbid(
                    i.value.is_some()
                        || i.base.is_some()
                        || i.amplitude.is_some()
                        || i.modes.is_some()
                        || i.max_mode.is_some()
                        || i.scale.is_some()
                        || i.decay.is_some(),
                    "non-path fields",
                )
            }
            other => Err(err(format!("unknown initial-data kind '{other}'"))),
        }
    }

    fn validate_check(&self, check: &CheckSpec, dim: usize) -> Result<()> {
        if let Some(p) = check.p {
            if !(p.is_finite() && p > 0.0) || (p - 1.0).abs() < 1e-12 {
                return Err(err(format!(
                    "per-check p override must be positive and ≠ 1 (got {p})"
                )));
            }
        }
        let p_eff = check.effective_p(self.solver.p);
        let t_min = check.t_check_min();
        if !(t_min.is_finite() && t_min >= 0.0 && t_min < self.solver.t_end) {
            return Err(err(format!(
                "t_check_min = {t_min} must lie in [0, t_end = {})",
                self.solver.t_end
            )));
        }
        if let Some(tol) = check.tol {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(err(format!("tol must be non-negative (got {tol})")));
            }
        }
        let n = dim as f64;
        let need_m = |check: &CheckSpec| -> Result<f64> {
            let m = check
                .m
                .ok_or_else(|| err("this check needs a dimension parameter 'm'"))?;
            if !(m.is_finite() && m >= n) {
                return Err(err(format!("m = {m} must be finite and ≥ n = {n}")));
            }
            Ok(m)
        };
        let forbid_eps = |c: &CheckSpec| {
            if c.eps.is_some() {
                Err(err("only entropy-fast takes 'eps'"))
            } else {
                Ok(())
            }
        };

        if let Some(kind) = check.estimate_kind() {
            forbid_eps(check)?;
            let m = need_m(check)?;
            if kind.is_porous() && p_eff <= 1.0 {
                return Err(err(format!(
                    "porous family with effective p = {p_eff} ≤ 1"
                )));
            }
            if !kind.is_porous() && p_eff >= 1.0 {
                return Err(err(format!("fast family with effective p = {p_eff} ≥ 1")));
            }
            if kind.takes_alpha() {
                if check.alpha.is_none() {
                    return Err(err("this family needs an explicit 'alpha'"));
                }
            } else if check.alpha.is_some() {
                return Err(err("this family determines alpha itself; drop the key"));
            }
            // ã must exist for the effective (p, m)
            crate::estimates::dimensional_constant(p_eff, m)?;
            return Ok(());
        }

        match check.id.as_str() {
            "harnack-inequality" => {
                forbid_eps(check)?;
                need_m(check)?;
                if check.alpha.is_none() {
                    return Err(err("harnack-inequality needs a constant 'alpha'"));
                }
                Ok(())
            }
            "pressure-residual" => {
                forbid_eps(check)?;
                if check.m.is_some() || check.alpha.is_some() {
                    return Err(err("pressure-residual takes only t_check_min/tol/p"));
                }
                Ok(())
            }
            "entropy-porous" => {
                forbid_eps(check)?;
                need_m(check)?;
                if check.alpha.is_some() {
                    return Err(err("entropy checks take no 'alpha'"));
                }
                if p_eff <= 1.0 {
                    return Err(err(format!("entropy-porous needs p > 1 (got {p_eff})")));
                }
                Ok(())
            }
            "entropy-fast" => {
                let m = need_m(check)?;
                if check.alpha.is_some() {
                    return Err(err("entropy checks take no 'alpha'"));
                }
                if !(p_eff < 1.0) {
                    return Err(err(format!("entropy-fast needs p < 1 (got {p_eff})")));
                }
                let eps = check.eps.ok_or_else(|| err("entropy-fast needs 'eps'"))?;
                if !crate::entropy::fast_window_contains(p_eff, m, n, eps) {
                    return Err(err(format!(
                        "(p, ε) = ({p_eff}, {eps}) outside the admissible window for m = {m}, n = {n}"
                    )));
                }
                Ok(())
            }
            "nash-rate" | "dissipation-rate" => {
                forbid_eps(check)?;
                if check.m.is_some() || check.alpha.is_some() {
                    return Err(err("rate identities take only t_check_min/tol/p"));
                }
                Ok(())
            }
            other => Err(Error::Parse(format!("unknown check id '{other}'"))),
        }
    }

    pub fn build_manifold(&self) -> Result<Arc<Manifold>> {
        let weight = match self.manifold.weight.kind.as_str() {
            "zero" => Weight::Zero,
            "sin-first-coord" => Weight::SinFirstCoord {
                amplitude: self.manifold.weight.amplitude.unwrap_or(0.0),
            },
            other => return Err(err(format!("unknown weight kind '{other}'"))),
        };
        match self.manifold.kind.as_str() {
            "circle" => Manifold::circle(
                self.manifold.length.unwrap_or(0.0),
                self.manifold.nodes.unwrap_or(0),
                weight,
            ),
            "torus" => Manifold::torus(
                self.manifold.lengths.unwrap_or([0.0; 2]),
                self.manifold.grid.unwrap_or([0; 2]),
                weight,
            ),
            other => Err(err(format!("unknown manifold kind '{other}'"))),
        }
    }

    /// Sample the initial data on `manifold`. `seed` must be the
    /// effective seed (CLI override already applied).
    pub fn build_initial(&self, manifold: &Arc<Manifold>, seed: Option<u64>) -> Result<ScalarField> {
        let i = &self.initial;
        match i.kind.as_str() {
            "constant" => Ok(ScalarField::constant(manifold, i.value.unwrap_or(1.0))),
            "cosine" => {
                let poly = TrigPoly::cosine(
                    manifold.lengths(),
                    i.modes.as_deref().unwrap_or(&[]),
                    i.amplitude.unwrap_or(0.0),
                )
                .with_offset(i.base.unwrap_or(0.0));
                Ok(poly.sample(manifold))
            }
            "random-trig" => {
                let seed = seed.ok_or_else(|| err("randomized initial data needs a seed"))?;
                let poly = TrigPoly::random(
                    seed,
                    manifold.lengths(),
                    i.max_mode.unwrap_or(1),
                    i.scale.unwrap_or(0.0),
                    i.decay.unwrap_or(1.0),
                )
                .with_offset(i.base.unwrap_or(0.0));
                Ok(poly.sample(manifold))
            }
            "file" => {
                let raw = i.path.as_deref().unwrap_or("");
                let path = match &self.base_dir {
                    Some(dir) if !Path::new(raw).is_absolute() => dir.join(raw),
                    _ => PathBuf::from(raw),
                };
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Parse(format!("initial data {}: {e}", path.display())))?;
                let values: Vec<f64> = text
                    .split_whitespace()
                    .map(|tok| {
                        tok.parse::<f64>()
                            .map_err(|e| Error::Parse(format!("initial data value '{tok}': {e}")))
                    })
                    .collect::<Result<_>>()?;
                if values.len() != manifold.n_nodes() {
                    return Err(err(format!(
                        "initial data file holds {} values, manifold has {} nodes",
                        values.len(),
                        manifold.n_nodes()
                    )));
                }
                ScalarField::from_values(manifold, values)
            }
            other => Err(err(format!("unknown initial-data kind '{other}'"))),
        }
    }

    /// Solver configuration with the exponent replaced by `p` (used once
    /// per distinct effective p).
    pub fn solver_config(&self, p: f64) -> Result<SolverConfig> {
        let s = &self.solver;
        let scheme = match s.scheme.as_deref().unwrap_or("euler") {
            "euler" => Scheme::Euler,
            "rk4" => Scheme::Rk4,
            other => return Err(err(format!("unknown scheme '{other}'"))),
        };
        let step = match (s.dt, s.cfl_fraction) {
            (Some(_), Some(_)) => {
                return Err(err("give either 'dt' or 'cfl_fraction', not both"));
            }
            (Some(dt), None) => StepSize::Fixed(dt),
            (None, Some(c)) => StepSize::Auto { cfl_fraction: c },
            (None, None) => StepSize::Auto {
                cfl_fraction: DEFAULT_CFL_FRACTION,
            },
        };
        let mut cfg = SolverConfig::new(p, s.t_end);
        cfg.scheme = scheme;
        cfg.step = step;
        if let Some(floor) = s.positivity_floor {
            cfg.positivity_floor = floor;
        }
        if let Some(stride) = s.snapshot_stride {
            cfg.snapshot_stride = stride;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Distinct effective exponents across all checks (sorted), each with
    /// the indices of the checks that use it. Checkless scenarios still
    /// solve the solver's own p.
    pub fn p_groups(&self) -> Vec<(f64, Vec<usize>)> {
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut push = |p: f64, idx: Option<usize>| {
            if let Some((_, list)) = groups.iter_mut().find(|(q, _)| q.to_bits() == p.to_bits()) {
                if let Some(i) = idx {
                    list.push(i);
                }
            } else {
                groups.push((p, idx.into_iter().collect()));
            }
        };
        if self.checks.is_empty() {
            push(self.solver.p, None);
        }
        for (i, check) in self.checks.iter().enumerate() {
            push(check.effective_p(self.solver.p), Some(i));
        }
        groups.sort_by(|a, b| a.0.total_cmp(&b.0));
        groups
    }
}
