use num_traits::Float;

use crate::error::{Error, Result};
use crate::quantum::grid::TimeGrid;
use crate::quantum::hamiltonian::HamiltonianModel;
use crate::quantum::state::StateVector;
use crate::spectral::TimeSignal;
use crate::{scalar, Complex, Real};

/// Driving field as a function of time.
///
/// Propagation uses a fourth-order commutator-free scheme that samples the
/// field at Gauss points inside each step, so the field must be evaluable
/// at arbitrary times, not only on the time grid. Band-limited fields
/// (spectrum interpolants) and closures both qualify.
pub trait ControlField<R: Real>: Sync {
    fn value(&self, t: R) -> R;
}

impl<R: Real, F: Fn(R) -> R + Sync> ControlField<R> for F {
    fn value(&self, t: R) -> R {
        self(t)
    }
}

/// Inhomogeneous term `G(t)` of an equation `dv/dt = -i H(t) v + G(t)`.
pub trait SourceTerm<R: Real> {
    fn eval(&self, t: R, out: &mut [Complex<R>]);
    fn is_zero(&self) -> bool {
        false
    }
}

pub struct ZeroSource;

impl<R: Real> SourceTerm<R> for ZeroSource {
    fn eval(&self, _t: R, out: &mut [Complex<R>]) {
        for o in out {
            *o = Complex::new(R::zero(), R::zero());
        }
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// States of one propagation run: the endpoints `t = 0` and `t = T` plus
/// every midpoint node of the time grid (`n_t + 2` states in total).
#[derive(Debug, Clone)]
pub struct Trajectory<R: Real> {
    pub initial: StateVector<R>,
    pub nodes: Vec<StateVector<R>>,
    pub terminal: StateVector<R>,
    pub field_used: TimeSignal<R>,
}

impl<R: Real> Trajectory<R> {
    pub fn len(&self) -> usize {
        self.nodes.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, j: usize) -> &StateVector<R> {
        &self.nodes[j]
    }
}

// Gauss-Legendre points and the fourth-order commutator-free weights.
const GAUSS_LO: f64 = 0.5 - 0.288_675_134_594_812_88; // 1/2 - sqrt(3)/6
const GAUSS_HI: f64 = 0.5 + 0.288_675_134_594_812_88;
const CF_A1: f64 = 0.25 + 0.288_675_134_594_812_88; // 1/4 + sqrt(3)/6
const CF_A2: f64 = 0.25 - 0.288_675_134_594_812_88;

const MAX_SUBSTEPS: usize = 1 << 22;
const MAX_TAYLOR_TERMS: usize = 120;

struct Stepper<'a, R: Real> {
    model: &'a HamiltonianModel<R>,
    field: &'a dyn ControlField<R>,
    // scratch
    w: Vec<Complex<R>>,
    term: Vec<Complex<R>>,
    h_term: Vec<Complex<R>>,
    h_scratch: Vec<Complex<R>>,
    src: Vec<Complex<R>>,
}

impl<'a, R: Real> Stepper<'a, R> {
    fn new(model: &'a HamiltonianModel<R>, field: &'a dyn ControlField<R>) -> Self {
        let n = model.dim();
        let zero = vec![Complex::new(R::zero(), R::zero()); n];
        Self {
            model,
            field,
            w: zero.clone(),
            term: zero.clone(),
            h_term: zero.clone(),
            h_scratch: zero.clone(),
            src: zero,
        }
    }

    /// `v <- exp(-i * tau * (H0 - e_eff * mu)) v` to machine accuracy,
    /// by scaled Taylor summation.
    fn exp_apply(&mut self, e_eff: R, tau: R, v: &mut [Complex<R>]) {
        let hnorm = self.model.h_norm_bound(e_eff);
        let m = Float::ceil(hnorm * Float::abs(tau) / scalar::<R>(0.5))
            .to_f64()
            .unwrap_or(1.0)
            .max(1.0) as usize;
        let tau_m = tau / scalar::<R>(m as f64);
        let tail = scalar::<R>(1e-17);
        for _ in 0..m {
            self.w.copy_from_slice(v);
            self.term.copy_from_slice(v);
            let mut w_norm_sq = R::zero();
            for a in self.w.iter() {
                w_norm_sq += a.norm_sqr();
            }
            for k in 1..=MAX_TAYLOR_TERMS {
                self.model
                    .apply_h_to(e_eff, &self.term, &mut self.h_term, &mut self.h_scratch);
                // term <- (-i * tau_m / k) * (H term)
                let c = Complex::new(R::zero(), -tau_m / scalar::<R>(k as f64));
                let mut t_norm_sq = R::zero();
                for (t, h) in self.term.iter_mut().zip(&self.h_term) {
                    *t = c * h;
                    t_norm_sq += t.norm_sqr();
                }
                for (w, t) in self.w.iter_mut().zip(&self.term) {
                    *w += *t;
                }
                if t_norm_sq <= tail * tail * Float::max(w_norm_sq, scalar::<R>(1e-300)) {
                    break;
                }
            }
            v.copy_from_slice(&self.w);
        }
    }

    /// One fourth-order commutator-free step of the homogeneous equation
    /// over `[a, a + h]` (h may be negative for backward integration).
    fn cf4_step(&mut self, a: R, h: R, v: &mut [Complex<R>]) {
        let e1 = self.field.value(a + scalar::<R>(GAUSS_LO) * h);
        let e2 = self.field.value(a + scalar::<R>(GAUSS_HI) * h);
        let e_first = scalar::<R>(2.0) * (scalar::<R>(CF_A1) * e1 + scalar::<R>(CF_A2) * e2);
        let e_second = scalar::<R>(2.0) * (scalar::<R>(CF_A2) * e1 + scalar::<R>(CF_A1) * e2);
        let half = h * scalar::<R>(0.5);
        self.exp_apply(e_first, half, v);
        self.exp_apply(e_second, half, v);
    }

    /// Propagator `U(b, s)` applied to the scratch source vector.
    fn transport_src(&mut self, s: R, b: R) {
        let span = b - s;
        if span == R::zero() {
            return;
        }
        let e1 = self.field.value(s + scalar::<R>(GAUSS_LO) * span);
        let e2 = self.field.value(s + scalar::<R>(GAUSS_HI) * span);
        let e_first = scalar::<R>(2.0) * (scalar::<R>(CF_A1) * e1 + scalar::<R>(CF_A2) * e2);
        let e_second = scalar::<R>(2.0) * (scalar::<R>(CF_A2) * e1 + scalar::<R>(CF_A1) * e2);
        let half = span * scalar::<R>(0.5);
        let mut buf = std::mem::take(&mut self.src);
        self.exp_apply(e_first, half, &mut buf);
        self.exp_apply(e_second, half, &mut buf);
        self.src = buf;
    }

    /// One step of the inhomogeneous equation: homogeneous CF4 transport
    /// plus two-point Gauss quadrature of the Duhamel integral.
    fn cf4_step_with_source(
        &mut self,
        a: R,
        h: R,
        v: &mut Vec<Complex<R>>,
        source: &dyn SourceTerm<R>,
    ) {
        self.cf4_step(a, h, v);
        let b = a + h;
        let wgt = Complex::new(h * scalar::<R>(0.5), R::zero());
        for c in [GAUSS_LO, GAUSS_HI] {
            let s = a + scalar::<R>(c) * h;
            let mut buf = std::mem::take(&mut self.src);
            source.eval(s, &mut buf);
            self.src = buf;
            self.transport_src(s, b);
            for (o, g) in v.iter_mut().zip(&self.src) {
                *o += wgt * g;
            }
        }
    }

    fn run_span(
        &mut self,
        a: R,
        b: R,
        v0: &[Complex<R>],
        m: usize,
        source: Option<&dyn SourceTerm<R>>,
    ) -> Vec<Complex<R>> {
        let mut v = v0.to_vec();
        let h = (b - a) / scalar::<R>(m as f64);
        for i in 0..m {
            let t = a + h * scalar::<R>(i as f64);
            match source {
                Some(src) => self.cf4_step_with_source(t, h, &mut v, src),
                None => self.cf4_step(t, h, &mut v),
            }
        }
        v
    }

    /// Integrate over `[a, b]` with step doubling until the change between
    /// `m` and `2m` substeps drops below `budget`.
    fn integrate_span(
        &mut self,
        a: R,
        b: R,
        v: &mut Vec<Complex<R>>,
        budget: R,
        source: Option<&dyn SourceTerm<R>>,
        hint: &mut usize,
    ) -> Result<()> {
        let mut m = (*hint).max(1);
        // The m-vs-2m difference cannot drop below accumulated roundoff, so
        // floor the budget near machine precision.
        let scale = Float::max(
            Float::sqrt(v.iter().map(|x| x.norm_sqr()).fold(R::zero(), |s, x| s + x)),
            R::one(),
        );
        let budget = Float::max(budget, scalar::<R>(64.0) * R::epsilon() * scale);
        let mut prev = self.run_span(a, b, v, m, source);
        loop {
            let cur = self.run_span(a, b, v, 2 * m, source);
            let mut err_sq = R::zero();
            for (p, c) in prev.iter().zip(&cur) {
                err_sq += (*p - *c).norm_sqr();
            }
            let err = Float::sqrt(err_sq);
            if !Float::is_finite(err) {
                return Err(Error::NumericalFailure(format!(
                    "non-finite amplitudes near t = {a}"
                )));
            }
            if err <= budget {
                *hint = if err <= budget / scalar::<R>(64.0) {
                    (m / 2).max(1)
                } else {
                    m
                };
                *v = cur;
                return Ok(());
            }
            if 2 * m >= MAX_SUBSTEPS {
                return Err(Error::StepSizeUnderflow(a.to_f64().unwrap_or(f64::NAN)));
            }
            prev = cur;
            m *= 2;
        }
    }
}

fn span_boundaries<R: Real>(tgrid: &TimeGrid<R>) -> Vec<R> {
    let mut b = Vec::with_capacity(tgrid.n_t + 2);
    b.push(R::zero());
    b.extend(tgrid.nodes());
    b.push(tgrid.total_time);
    b
}

/// Solve `d psi/dt = -i H(t) psi` forward over `[0, T]` from a normalized
/// initial state, storing the state at every grid node plus both endpoints.
///
/// `tol` bounds the accumulated integration error over the full interval
/// (default contract: `1e-9`).
pub fn propagate_forward<R: Real>(
    model: &HamiltonianModel<R>,
    field: &dyn ControlField<R>,
    psi0: &StateVector<R>,
    tgrid: &TimeGrid<R>,
    tol: R,
) -> Result<Trajectory<R>> {
    if psi0.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: psi0.len(),
        });
    }
    if Float::abs(psi0.norm() - R::one()) > scalar::<R>(1e-8) {
        return Err(Error::InvalidValue(
            "initial state must be normalized".into(),
        ));
    }
    let boundaries = span_boundaries(tgrid);
    let mut stepper = Stepper::new(model, field);
    let mut hint = 1usize;
    let mut v = psi0.amplitudes.clone();
    let mut nodes = Vec::with_capacity(tgrid.n_t);
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        let budget = tol * (b - a) / tgrid.total_time;
        stepper.integrate_span(a, b, &mut v, budget, None, &mut hint)?;
        if nodes.len() < tgrid.n_t {
            nodes.push(StateVector::new(v.clone(), psi0.basis));
        }
    }
    let terminal = StateVector::new(v, psi0.basis);
    let field_used = TimeSignal::new(tgrid.nodes().into_iter().map(|t| field.value(t)).collect());
    Ok(Trajectory {
        initial: psi0.clone(),
        nodes,
        terminal,
        field_used,
    })
}

/// Solve the costate equation `d chi/dt = -i H(t) chi + G(t)` backward from
/// `chi(T)` to `t = 0`. `source` supplies the full inhomogeneous vector
/// `G(t)` at arbitrary times (any sign conventions are the caller's).
///
/// The returned trajectory is stored in ascending time order.
pub fn propagate_backward_inhomogeneous<R: Real>(
    model: &HamiltonianModel<R>,
    field: &dyn ControlField<R>,
    source: &dyn SourceTerm<R>,
    chi_t: &StateVector<R>,
    tgrid: &TimeGrid<R>,
    tol: R,
) -> Result<Trajectory<R>> {
    if chi_t.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: chi_t.len(),
        });
    }
    let src_opt: Option<&dyn SourceTerm<R>> = if source.is_zero() {
        None
    } else {
        Some(source)
    };

    let boundaries = span_boundaries(tgrid);
    let mut stepper = Stepper::new(model, field);
    let mut hint = 1usize;
    let mut v = chi_t.amplitudes.clone();
    let mut nodes_rev = Vec::with_capacity(tgrid.n_t);
    for w in boundaries.windows(2).rev() {
        let (a, b) = (w[1], w[0]); // integrate from later to earlier time
        let scale = {
            let mut n = R::zero();
            for x in &v {
                n += x.norm_sqr();
            }
            Float::max(Float::sqrt(n), R::one())
        };
        let budget = tol * (a - b) / tgrid.total_time * scale;
        stepper.integrate_span(a, b, &mut v, budget, src_opt, &mut hint)?;
        if nodes_rev.len() < tgrid.n_t {
            nodes_rev.push(StateVector::new(v.clone(), chi_t.basis));
        }
    }
    let initial = StateVector::new(v, chi_t.basis);
    nodes_rev.reverse();
    let field_used = TimeSignal::new(tgrid.nodes().into_iter().map(|t| field.value(t)).collect());
    Ok(Trajectory {
        initial,
        nodes: nodes_rev,
        terminal: chi_t.clone(),
        field_used,
    })
}

/// Evolve a single state under the homogeneous equation between two
/// arbitrary times (either direction), to accuracy `tol` on this span.
pub fn evolve_state<R: Real>(
    model: &HamiltonianModel<R>,
    field: &dyn ControlField<R>,
    state: &mut StateVector<R>,
    from_t: R,
    to_t: R,
    tol: R,
) -> Result<()> {
    if from_t == to_t {
        return Ok(());
    }
    let mut stepper = Stepper::new(model, field);
    let mut hint = 1usize;
    let mut v = std::mem::take(&mut state.amplitudes);
    stepper.integrate_span(from_t, to_t, &mut v, tol, None, &mut hint)?;
    state.amplitudes = v;
    Ok(())
}
