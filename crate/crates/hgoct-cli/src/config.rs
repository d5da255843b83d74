//! Run configuration: builtin problem names or inline problem definitions
//! with closed-form expression strings, plus optimizer overrides.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use hgoct::functional::{FunctionalWeights, SubspaceSpec};
use hgoct::optimizer::GammaSchedule;
use hgoct::problems::{build_by_name, ProblemSpec};
use hgoct::quantum::{
    eigensolve, BasisKind, HamiltonianModel, Operator, SpatialGrid, StateVector, TimeGrid,
};
use hgoct::spectral::{frequency, FilterFunction, FilterRole, Spectrum};

use crate::expr;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_init: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_schedule: Option<GammaScheduleConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ProblemRef {
    Builtin(String),
    Inline(Box<InlineProblem>),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GammaScheduleConfig {
    pub factor: f64,
    pub every: usize,
}

/// A problem given directly in the config: either a finite level system
/// (dense matrices) or a 1-D spatial system (expression strings in `x`).
/// Filters and the initial field are expression strings in `w`; subspace
/// weights are expression strings in the eigenstate index `n`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<LevelSystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spatial: Option<SpatialSystem>,
    pub total_time: f64,
    pub n_t: usize,
    pub field_filter: String,
    pub target_filter: String,
    pub initial_field: String,
    #[serde(default)]
    pub kappa: f64,
    /// Eigenstate index of the initial state; default 0 (the ground state).
    #[serde(default)]
    pub initial_level: usize,
    /// Allowed-subspace weights s(n) ∈ [0, 1] over eigenstates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_weights: Option<String>,
    /// Forbidden-penalty weights γ(n) ≥ 0 over eigenstates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forbidden_weights: Option<String>,
    #[serde(default = "default_k_init")]
    pub k_init: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn default_k_init() -> f64 {
    0.5
}

fn default_tau() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LevelSystem {
    pub h0: Vec<Vec<f64>>,
    pub mu: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpatialSystem {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub mass: f64,
    /// V(x), expression in `x`.
    pub potential: String,
    /// μ(x), expression in `x`.
    pub dipole: String,
}

impl RunConfig {
    pub fn from_problem_arg(arg: &str) -> Result<Self> {
        if let Some(path) = arg.strip_prefix("file:") {
            Self::load(path)
        } else {
            Ok(Self {
                problem: ProblemRef::Builtin(arg.to_string()),
                out: None,
                max_iterations: None,
                tau: None,
                k_init: None,
                checkpoint_every: None,
                total_time: None,
                n_t: None,
                gamma_schedule: None,
            })
        }
    }

    pub fn load(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {path}"))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config in {path}"))
    }

    /// Build the problem, applying any `total_time`/`n_t`/`k_init`/`tau`
    /// overrides. Relaxation settings on the returned spec reflect them.
    pub fn build_problem(&self) -> Result<ProblemSpec<f64>> {
        let spec = self.build_problem_unvalidated()?;
        spec.validate()?;
        Ok(spec)
    }

    /// Same as `build_problem` but leaves consistency checking to the
    /// caller, so `validate` can report violations instead of failing.
    pub fn build_problem_unvalidated(&self) -> Result<ProblemSpec<f64>> {
        let mut spec = match &self.problem {
            ProblemRef::Builtin(name) => match (self.total_time, self.n_t) {
                (None, None) => build_by_name::<f64>(name)?,
                (t, n) => build_resized(name, t, n)?,
            },
            ProblemRef::Inline(inline) => {
                if self.total_time.is_some() || self.n_t.is_some() {
                    bail!("inline problems take total_time/n_t directly, not as overrides");
                }
                build_inline(inline)?
            }
        };
        if let Some(k) = self.k_init {
            spec.k_init = k;
        }
        if let Some(tau) = self.tau {
            spec.tau = tau;
        }
        if let Some(gs) = self.gamma_schedule {
            spec.gamma_schedule = Some(GammaSchedule {
                factor: gs.factor,
                every: gs.every,
            });
        }
        Ok(spec)
    }
}

fn build_resized(name: &str, total_time: Option<f64>, n_t: Option<usize>) -> Result<ProblemSpec<f64>> {
    use hgoct::problems::{build_11ls_sized, build_coulomb_sized, build_hcl_sized, build_tls_sized};
    let base = build_by_name::<f64>(name)?;
    let t = total_time.unwrap_or(base.tgrid.total_time);
    let n = n_t.unwrap_or(base.tgrid.n_t);
    Ok(match name {
        "tls" => {
            if t != base.tgrid.total_time {
                bail!("the tls problem has a fixed horizon; only n_t can be overridden");
            }
            build_tls_sized(n)
        }
        "11ls" => {
            if t != base.tgrid.total_time {
                bail!("the 11ls problem has a fixed horizon; only n_t can be overridden");
            }
            build_11ls_sized(n)
        }
        "hcl" => build_hcl_sized(t, n)?,
        "coulomb" => build_coulomb_sized(t, n)?,
        other => bail!("unknown builtin problem `{other}`"),
    })
}

fn dense_from_rows(rows: &[Vec<f64>], what: &str) -> Result<Operator<f64>> {
    let n = rows.len();
    let mut flat = Vec::with_capacity(n * n);
    for row in rows {
        if row.len() != n {
            bail!("{what} must be a square matrix");
        }
        flat.extend_from_slice(row);
    }
    Ok(Operator::dense_real(n, &flat)?)
}

fn sample_expr(text: &str, var: &str, points: &[f64], what: &str) -> Result<Vec<f64>> {
    let e = expr::parse(text, var).with_context(|| format!("in {what}"))?;
    let values: Vec<f64> = points.iter().map(|&p| e.eval(p)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        bail!("{what} evaluates to a non-finite value on its grid");
    }
    Ok(values)
}

fn build_inline(p: &InlineProblem) -> Result<ProblemSpec<f64>> {
    if !(p.total_time > 0.0) || p.n_t == 0 {
        bail!("total_time must be positive and n_t nonzero");
    }
    let tgrid = TimeGrid::new(p.total_time, p.n_t);

    let (model, grid, basis) = match (&p.levels, &p.spatial) {
        (Some(_), Some(_)) => bail!("give either `levels` or `spatial`, not both"),
        (None, None) => bail!("an inline problem needs `levels` or `spatial`"),
        (Some(l), None) => {
            let h0 = dense_from_rows(&l.h0, "h0")?;
            let mu = dense_from_rows(&l.mu, "mu")?;
            if h0.dim() != mu.dim() {
                bail!("h0 and mu must have the same dimension");
            }
            (HamiltonianModel::new(vec![h0], mu)?, None, BasisKind::Levels)
        }
        (None, Some(s)) => {
            if !(s.x_max > s.x_min) || s.n_x == 0 {
                bail!("spatial grid must have x_max > x_min and n_x nonzero");
            }
            if !(s.mass > 0.0) {
                bail!("mass must be positive");
            }
            let grid = SpatialGrid::new(s.x_min, s.x_max, s.n_x);
            let xs = grid.points();
            let v = sample_expr(&s.potential, "x", &xs, "potential")?;
            let mu_vals = sample_expr(&s.dipole, "x", &xs, "dipole")?;
            let kinetic = Operator::momentum_diagonal(&grid, |k| k * k / (2.0 * s.mass));
            let model = HamiltonianModel::new(
                vec![kinetic, Operator::spatial_diagonal(v)],
                Operator::spatial_diagonal(mu_vals),
            )?;
            (model, Some(grid), BasisKind::SpatialGrid)
        }
    };

    let dim = model.dim();
    let eigenpairs = eigensolve(&model, grid.as_ref(), dim)?;
    if p.initial_level >= dim {
        bail!("initial_level {} out of range (dimension {dim})", p.initial_level);
    }
    let psi0: StateVector<f64> = eigenpairs[p.initial_level].1.clone();

    let freqs: Vec<f64> = (0..tgrid.n_t).map(|k| frequency(&tgrid, k)).collect();
    let field_filter = FilterFunction::new(
        sample_expr(&p.field_filter, "w", &freqs, "field_filter")?,
        FilterRole::FieldPenalty,
    )?;
    let target_filter = FilterFunction::new(
        sample_expr(&p.target_filter, "w", &freqs, "target_filter")?,
        FilterRole::Target,
    )?;
    let initial_spectrum = Spectrum::new(sample_expr(
        &p.initial_field,
        "w",
        &freqs,
        "initial_field",
    )?);

    let indices: Vec<f64> = (0..dim).map(|n| n as f64).collect();
    let s_weights = match &p.allowed_weights {
        Some(text) => Some(sample_expr(text, "n", &indices, "allowed_weights")?),
        None => None,
    };
    let gamma_weights = match &p.forbidden_weights {
        Some(text) => Some(sample_expr(text, "n", &indices, "forbidden_weights")?),
        None => None,
    };
    let subspace = if s_weights.is_none() && gamma_weights.is_none() {
        SubspaceSpec::unrestricted()
    } else {
        SubspaceSpec::from_eigenbasis(&eigenpairs, s_weights.as_deref(), gamma_weights.as_deref())?
    };

    let weights = FunctionalWeights::new(
        field_filter,
        target_filter,
        p.kappa,
        subspace,
        model.mu.clone(),
        basis,
    )?;

    let spec = ProblemSpec {
        name: p.name.clone(),
        psi0,
        initial_spectrum,
        model,
        tgrid,
        weights,
        grid,
        eigenpairs,
        k_init: p.k_init,
        tau: p.tau,
        gamma_schedule: None,
    };
    Ok(spec)
}
