//! Relaxation iteration for the field spectrum.
//!
//! Each step propagates the state forward, the costate backward, forms the
//! Euler-Lagrange field `f_eps * C[-Im<chi|mu|psi>]`, and mixes it into the
//! current field with weight `K`. `K` is halved until the objective
//! improves, and the accepted value carries over to the next iteration
//! (decrease-only). Convergence is declared when the relative change of the
//! field spectrum drops below `tau`.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::functional::{
    adjoint_source, chi_terminal, evaluate_terms, overlap_signal, JBreakdown,
};
use crate::problems::ProblemSpec;
use crate::quantum::hamiltonian::HamiltonianModel;
use crate::quantum::propagate::{
    propagate_backward_inhomogeneous, propagate_forward, Trajectory,
};
use crate::spectral::{CosineTransform, FilterFunction, Spectrum, SpectrumInterpolant, TimeSignal};
use crate::{scalar, Real};

/// Knobs of the relaxation scheme.
#[derive(Debug, Clone)]
pub struct RelaxationConfig<R: Real> {
    /// Initial mixing parameter, in (0, 1].
    pub k_init: R,
    /// Convergence tolerance on the relative field change.
    pub tau: R,
    pub max_iterations: usize,
    /// Abort threshold for the mixing parameter.
    pub k_floor: R,
    pub max_backtracks_per_iter: usize,
    /// Accumulated accuracy budget for each propagation over [0, T].
    pub propagation_tol: R,
    /// Optional growth of the forbidden-subspace penalty between iterations.
    pub gamma_schedule: Option<GammaSchedule<R>>,
}

/// Multiply the forbidden-penalty operator by `factor` after every
/// `every` accepted iterations.
#[derive(Debug, Clone)]
pub struct GammaSchedule<R: Real> {
    pub factor: R,
    pub every: usize,
}

impl<R: Real> RelaxationConfig<R> {
    pub fn new(k_init: R, tau: R, max_iterations: usize) -> Result<Self> {
        if !(k_init > R::zero() && k_init <= R::one()) {
            return Err(Error::InvalidValue(format!(
                "mixing parameter must be in (0, 1], got {k_init}"
            )));
        }
        if tau <= R::zero() {
            return Err(Error::InvalidValue(format!(
                "convergence tolerance must be positive, got {tau}"
            )));
        }
        Ok(Self {
            k_init,
            tau,
            max_iterations,
            k_floor: scalar(1e-12),
            max_backtracks_per_iter: 60,
            propagation_tol: scalar(1e-9),
            gamma_schedule: None,
        })
    }

    /// Defaults of a built-in problem (its Table values for K and tau).
    pub fn for_problem(problem: &ProblemSpec<R>, max_iterations: usize) -> Self {
        let mut cfg = Self::new(problem.k_init, problem.tau, max_iterations)
            .expect("built-in problem defaults are valid");
        cfg.gamma_schedule = problem.gamma_schedule.clone();
        cfg
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<R: Real> {
    pub index: usize,
    pub j: JBreakdown<R>,
    pub k_used: R,
    pub metric: R,
    pub backtracks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    KUnderflow,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult<R: Real> {
    pub field_spectrum: Spectrum<R>,
    pub field_signal: TimeSignal<R>,
    pub trajectory: Trajectory<R>,
    pub history: Vec<IterationRecord<R>>,
    pub termination: Termination,
    pub final_j: JBreakdown<R>,
    /// Mixing parameter after the last accepted step (for resumption).
    pub final_k: R,
}

/// Mid-run snapshot sufficient to continue an optimization with results
/// bit-identical to an uninterrupted run.
#[derive(Debug, Clone)]
pub struct OptimizationState<R: Real> {
    pub next_iteration: usize,
    pub field_spectrum: Spectrum<R>,
    pub k: R,
    pub history: Vec<IterationRecord<R>>,
}

/// `f_eps(w) * C[-Im<chi(t)|mu|psi(t)>](w)` — the stationary field implied
/// by one forward/backward sweep. Exactly zero on zero-filter bins.
pub fn euler_lagrange_field<R: Real>(
    psi_traj: &Trajectory<R>,
    chi_traj: &Trajectory<R>,
    model: &HamiltonianModel<R>,
    field_filter: &FilterFunction<R>,
    ct: &CosineTransform<R>,
) -> Result<Spectrum<R>> {
    let mut overlap = overlap_signal(psi_traj, chi_traj, model)?;
    for v in &mut overlap.values {
        *v = -*v;
    }
    field_filter.apply(&ct.forward(&overlap)?)
}

/// `K * eps_el + (1 - K) * eps_old` per bin.
pub fn field_update<R: Real>(
    eps_old: &Spectrum<R>,
    eps_el: &Spectrum<R>,
    k: R,
) -> Result<Spectrum<R>> {
    if !(k > R::zero() && k <= R::one()) {
        return Err(Error::InvalidValue(format!(
            "mixing parameter must be in (0, 1], got {k}"
        )));
    }
    if eps_old.len() != eps_el.len() {
        return Err(Error::GridMismatch(format!(
            "spectra of lengths {} and {} cannot be mixed",
            eps_old.len(),
            eps_el.len()
        )));
    }
    let one_minus = R::one() - k;
    Ok(Spectrum::new(
        eps_old
            .values
            .iter()
            .zip(&eps_el.values)
            .map(|(&o, &e)| k * e + one_minus * o)
            .collect(),
    ))
}

/// `|eps_new - eps_old| / |eps_new|` in the plain Euclidean norm over bins.
pub fn convergence_metric<R: Real>(eps_new: &Spectrum<R>, eps_old: &Spectrum<R>) -> Result<R> {
    if eps_new.len() != eps_old.len() {
        return Err(Error::GridMismatch(format!(
            "spectra of lengths {} and {} cannot be compared",
            eps_new.len(),
            eps_old.len()
        )));
    }
    let mut num = R::zero();
    let mut den = R::zero();
    for (&a, &b) in eps_new.values.iter().zip(&eps_old.values) {
        num += (a - b) * (a - b);
        den += a * a;
    }
    if den == R::zero() {
        return Err(Error::ZeroField);
    }
    Ok(Float::sqrt(num / den))
}

pub fn optimize<R: Real>(
    problem: &ProblemSpec<R>,
    config: &RelaxationConfig<R>,
    observer: &mut dyn FnMut(&IterationRecord<R>),
) -> Result<OptimizationResult<R>> {
    optimize_from(problem, config, None, &mut |rec, _| observer(rec))
}

/// Run the relaxation scheme, optionally continuing from a saved state.
/// The observer sees every accepted record together with the accepted
/// field spectrum (enough to snapshot the run); it must not mutate state.
pub fn optimize_from<R: Real>(
    problem: &ProblemSpec<R>,
    config: &RelaxationConfig<R>,
    resume: Option<OptimizationState<R>>,
    observer: &mut dyn FnMut(&IterationRecord<R>, &Spectrum<R>),
) -> Result<OptimizationResult<R>> {
    problem.validate()?;
    let model = &problem.model;
    let tgrid = &problem.tgrid;
    let ct = CosineTransform::new(tgrid);
    let tol = config.propagation_tol;
    let mut weights = problem.weights.clone();

    let (start, mut eps, mut k, mut history) = match resume {
        Some(s) => (s.next_iteration, s.field_spectrum, s.k, s.history),
        None => (0, problem.initial_spectrum.clone(), config.k_init, Vec::new()),
    };
    if !(k > R::zero() && k <= R::one()) {
        return Err(Error::InvalidValue(format!(
            "mixing parameter must be in (0, 1], got {k}"
        )));
    }
    // Replay the gamma schedule so a resumed run sees the same penalties.
    if let Some(s) = &config.gamma_schedule {
        if s.every > 0 {
            if let Some(pf) = &mut weights.subspace.forbidden {
                for _ in 0..start / s.every {
                    pf.scale_in_place(s.factor);
                }
            }
        }
    }

    let mut interp = SpectrumInterpolant::new(&eps, tgrid);
    let mut psi = propagate_forward(model, &interp, &problem.psi0, tgrid, tol)?;
    let mut j_cur = evaluate_terms(&psi, &eps, &weights, &ct, model)?;

    let finish = |eps: Spectrum<R>,
                  interp: &SpectrumInterpolant<R>,
                  psi: Trajectory<R>,
                  history: Vec<IterationRecord<R>>,
                  termination: Termination,
                  j: JBreakdown<R>,
                  k: R|
     -> OptimizationResult<R> {
        let field_signal = psi.field_used.clone();
        let _ = interp;
        OptimizationResult {
            field_spectrum: eps,
            field_signal,
            trajectory: psi,
            history,
            termination,
            final_j: j,
            final_k: k,
        }
    };

    if history.last().map(|r| r.metric < config.tau) == Some(true) {
        // Already converged (resume of a finished run).
        return Ok(finish(eps, &interp, psi, history, Termination::Converged, j_cur, k));
    }

    for index in start..config.max_iterations {
        let chi_t = chi_terminal(&psi.terminal, &weights, model)?;
        let source = adjoint_source(&psi, &weights, &ct, model, &interp, tol)?;
        let chi = propagate_backward_inhomogeneous(model, &interp, &source, &chi_t, tgrid, tol)?;
        let eps_el = euler_lagrange_field(&psi, &chi, model, &weights.field_filter, &ct)?;

        let mut backtracks = 0usize;
        let (eps_new, psi_new, j_new, fixed_point) = loop {
            let trial = field_update(&eps, &eps_el, k)?;
            if trial.values == eps.values {
                // Self-consistent fixed point: nothing can change at any K.
                break (trial, None, j_cur, true);
            }
            let trial_interp = SpectrumInterpolant::new(&trial, tgrid);
            let psi_trial = propagate_forward(model, &trial_interp, &problem.psi0, tgrid, tol)?;
            let j_trial = evaluate_terms(&psi_trial, &trial, &weights, &ct, model)?;
            if j_trial.j_total > j_cur.j_total {
                break (trial, Some((psi_trial, trial_interp)), j_trial, false);
            }
            k = k * scalar::<R>(0.5);
            backtracks += 1;
            if k < config.k_floor || backtracks > config.max_backtracks_per_iter {
                return Ok(finish(
                    eps,
                    &interp,
                    psi,
                    history,
                    Termination::KUnderflow,
                    j_cur,
                    k,
                ));
            }
        };

        let metric = if fixed_point {
            R::zero()
        } else {
            convergence_metric(&eps_new, &eps)?
        };
        eps = eps_new;
        if let Some((psi_trial, trial_interp)) = psi_new {
            psi = psi_trial;
            interp = trial_interp;
        }
        j_cur = j_new;
        let record = IterationRecord {
            index,
            j: j_cur,
            k_used: k,
            metric,
            backtracks,
        };
        history.push(record);
        observer(&record, &eps);

        if let Some(s) = &config.gamma_schedule {
            if s.every > 0 && (index + 1) % s.every == 0 {
                if let Some(pf) = &mut weights.subspace.forbidden {
                    pf.scale_in_place(s.factor);
                    j_cur = evaluate_terms(&psi, &eps, &weights, &ct, model)?;
                }
            }
        }

        if metric < config.tau {
            return Ok(finish(eps, &interp, psi, history, Termination::Converged, j_cur, k));
        }
    }

    Ok(finish(
        eps,
        &interp,
        psi,
        history,
        Termination::MaxIterations,
        j_cur,
        k,
    ))
}
