//! The control objective and its adjoint machinery.
//!
//! The functional splits into four terms evaluated by discrete quadrature:
//! the emission yield in the target band (`j_max`), the inverse-filter field
//! penalty (`j_penal`), the forbidden-subspace penalty (`j_forb`) and the
//! terminal "ringing" penalty (`j_bound`). The same structures produce the
//! costate's inhomogeneous source, its terminal condition and the
//! stationarity gradient used for verification.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::quantum::grid::TimeGrid;
use crate::quantum::hamiltonian::HamiltonianModel;
use crate::quantum::operator::Operator;
use crate::quantum::propagate::{evolve_state, ControlField, SourceTerm, Trajectory};
use crate::quantum::state::{BasisKind, StateVector};
use crate::spectral::{
    frequency_spacing, CosineTransform, FilterFunction, FilterRole, Spectrum, SpectrumInterpolant,
    TimeSignal,
};
use crate::{scalar, Complex, Real};

/// Weighted projections onto the allowed and forbidden parts of the
/// Hilbert space. `allowed` is the operator `P_a` (identity when `None`);
/// `forbidden` is the penalty operator `P_f` (zero when `None`).
#[derive(Debug, Clone)]
pub struct SubspaceSpec<R: Real> {
    pub allowed: Option<Operator<R>>,
    pub forbidden: Option<Operator<R>>,
}

impl<R: Real> SubspaceSpec<R> {
    /// No restriction: `P_a = 1`, `P_f = 0`, under which the functional
    /// reduces to its unconstrained form.
    pub fn unrestricted() -> Self {
        Self {
            allowed: None,
            forbidden: None,
        }
    }

    pub fn is_unrestricted(&self) -> bool {
        self.allowed.is_none() && self.forbidden.is_none()
    }

    /// Weighted projections diagonal in the drift eigenbasis:
    /// `P_a = sum_n s_n |n><n|`, `P_f = sum_n gamma_n |n><n|`.
    /// Weight slices must cover every supplied eigenpair; `s_n` must lie in
    /// `[0, 1]` and `gamma_n` must be non-negative.
    pub fn from_eigenbasis(
        eigenpairs: &[(R, StateVector<R>)],
        s: Option<&[R]>,
        gamma: Option<&[R]>,
    ) -> Result<Self> {
        let check_len = |w: &[R]| -> Result<()> {
            if w.len() != eigenpairs.len() {
                return Err(Error::DimensionMismatch {
                    expected: eigenpairs.len(),
                    got: w.len(),
                });
            }
            Ok(())
        };
        let allowed = match s {
            None => None,
            Some(w) => {
                check_len(w)?;
                if w.iter().any(|&x| x < R::zero() || x > R::one()) {
                    return Err(Error::InvalidValue(
                        "allowed-subspace weights must lie in [0, 1]".into(),
                    ));
                }
                Some(eigenbasis_weighted_sum(eigenpairs, w)?)
            }
        };
        let forbidden = match gamma {
            None => None,
            Some(w) => {
                check_len(w)?;
                if w.iter().any(|&x| x < R::zero()) {
                    return Err(Error::InvalidValue(
                        "forbidden-subspace penalties must be non-negative".into(),
                    ));
                }
                Some(eigenbasis_weighted_sum(eigenpairs, w)?)
            }
        };
        Ok(Self { allowed, forbidden })
    }

    /// Weights given as functions of energy, sampled on the eigenvalues.
    pub fn from_energy_functions(
        eigenpairs: &[(R, StateVector<R>)],
        s: Option<&dyn Fn(R) -> R>,
        gamma: Option<&dyn Fn(R) -> R>,
    ) -> Result<Self> {
        let sample = |f: &dyn Fn(R) -> R| -> Vec<R> {
            eigenpairs.iter().map(|(e, _)| f(*e)).collect()
        };
        let sv = s.map(sample);
        let gv = gamma.map(sample);
        Self::from_eigenbasis(eigenpairs, sv.as_deref(), gv.as_deref())
    }

    /// Position-space weight functions `s(x)` and `gamma(x)` sampled on the
    /// spatial grid (diagonal operators).
    pub fn from_spatial(s: Option<Vec<R>>, gamma: Option<Vec<R>>) -> Result<Self> {
        if let Some(w) = &s {
            if w.iter().any(|&x| x < R::zero() || x > R::one()) {
                return Err(Error::InvalidValue(
                    "allowed-subspace weights must lie in [0, 1]".into(),
                ));
            }
        }
        if let Some(w) = &gamma {
            if w.iter().any(|&x| x < R::zero()) {
                return Err(Error::InvalidValue(
                    "forbidden-subspace penalties must be non-negative".into(),
                ));
            }
        }
        Ok(Self {
            allowed: s.map(Operator::spatial_diagonal),
            forbidden: gamma.map(Operator::spatial_diagonal),
        })
    }
}

fn eigenbasis_weighted_sum<R: Real>(
    eigenpairs: &[(R, StateVector<R>)],
    weights: &[R],
) -> Result<Operator<R>> {
    let n = eigenpairs
        .first()
        .map(|(_, v)| v.len())
        .ok_or_else(|| Error::InvalidValue("no eigenpairs supplied".into()))?;
    let mut elems = vec![Complex::new(R::zero(), R::zero()); n * n];
    for ((_, v), &w) in eigenpairs.iter().zip(weights) {
        if w == R::zero() {
            continue;
        }
        for i in 0..n {
            let a = v.amplitudes[i];
            for j in 0..n {
                elems[i * n + j] += a * v.amplitudes[j].conj() * w;
            }
        }
    }
    Operator::dense(n, elems)
}

/// All weights of the objective: the field filter (penalty), the target
/// filter (yield band), the terminal penalty strength `kappa`, subspace
/// projections, and the target operator `O` whose emission is shaped.
#[derive(Debug, Clone)]
pub struct FunctionalWeights<R: Real> {
    pub field_filter: FilterFunction<R>,
    pub target_filter: FilterFunction<R>,
    pub kappa: R,
    pub subspace: SubspaceSpec<R>,
    pub target: Operator<R>,
    /// Projected target `O_a = P_a O P_a` (equals `target` when the allowed
    /// subspace is unrestricted). Built once at construction.
    target_projected: Operator<R>,
}

impl<R: Real> FunctionalWeights<R> {
    pub fn new(
        field_filter: FilterFunction<R>,
        target_filter: FilterFunction<R>,
        kappa: R,
        subspace: SubspaceSpec<R>,
        target: Operator<R>,
        basis: BasisKind,
    ) -> Result<Self> {
        if field_filter.role != FilterRole::FieldPenalty {
            return Err(Error::InvalidValue(
                "field_filter must carry the field-penalty role".into(),
            ));
        }
        if target_filter.role != FilterRole::Target {
            return Err(Error::InvalidValue(
                "target_filter must carry the target role".into(),
            ));
        }
        if field_filter.len() != target_filter.len() {
            return Err(Error::GridMismatch(format!(
                "field filter has {} bins, target filter has {}",
                field_filter.len(),
                target_filter.len()
            )));
        }
        if kappa < R::zero() {
            return Err(Error::InvalidValue("kappa must be non-negative".into()));
        }
        let target_projected = match &subspace.allowed {
            None => target.clone(),
            Some(p) => {
                let n = target.dim();
                if p.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: p.dim(),
                    });
                }
                let pd = p.to_dense(basis);
                let od = target.to_dense(basis);
                let po = dense_mul(&pd, &od, n);
                let pop = dense_mul(&po, &pd, n);
                Operator::dense(n, hermitize(pop, n))?
            }
        };
        Ok(Self {
            field_filter,
            target_filter,
            kappa,
            subspace,
            target,
            target_projected,
        })
    }

    pub fn target_projected(&self) -> &Operator<R> {
        &self.target_projected
    }
}

fn dense_mul<R: Real>(a: &[Complex<R>], b: &[Complex<R>], n: usize) -> Vec<Complex<R>> {
    let mut out = vec![Complex::new(R::zero(), R::zero()); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == Complex::new(R::zero(), R::zero()) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Scrub the tiny anti-Hermitian roundoff of a product of Hermitian factors.
fn hermitize<R: Real>(mut m: Vec<Complex<R>>, n: usize) -> Vec<Complex<R>> {
    for i in 0..n {
        for j in 0..=i {
            let avg = (m[i * n + j] + m[j * n + i].conj()) * Complex::new(scalar(0.5), R::zero());
            m[i * n + j] = avg;
            m[j * n + i] = avg.conj();
        }
    }
    m
}

fn commutator_max_abs<R: Real>(a: &Operator<R>, b: &Operator<R>, basis: BasisKind) -> R {
    let n = a.dim();
    let ad = a.to_dense(basis);
    let bd = b.to_dense(basis);
    let ab = dense_mul(&ad, &bd, n);
    let ba = dense_mul(&bd, &ad, n);
    ab.iter().zip(&ba).fold(R::zero(), |acc, (x, y)| {
        let d = *x - *y;
        Float::max(acc, Float::max(Float::abs(d.re), Float::abs(d.im)))
    })
}

/// Values of the objective terms for one trajectory/field pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JBreakdown<R: Real> {
    pub j_max: R,
    pub j_penal: R,
    pub j_forb: R,
    pub j_bound: R,
    pub j_total: R,
}

/// `<psi(t_j)|O_a|psi(t_j)>` on every time node. With the default subspace
/// this is the plain expectation of the target operator.
pub fn projected_expectation_signal<R: Real>(
    traj: &Trajectory<R>,
    weights: &FunctionalWeights<R>,
) -> Result<TimeSignal<R>> {
    let o_a = weights.target_projected();
    let mut values = Vec::with_capacity(traj.nodes.len());
    for node in &traj.nodes {
        values.push(o_a.expectation(node)?);
    }
    Ok(TimeSignal::new(values))
}

/// Evaluate all four objective terms by discrete quadrature. Frequency sums
/// carry weight `dw` with a half weight on the zero bin; time sums carry
/// `dt`. Rejects fields with support outside the field filter.
pub fn evaluate_terms<R: Real>(
    traj: &Trajectory<R>,
    field_spectrum: &Spectrum<R>,
    weights: &FunctionalWeights<R>,
    ct: &CosineTransform<R>,
    model: &HamiltonianModel<R>,
) -> Result<JBreakdown<R>> {
    let n_t = ct.n_t();
    if traj.nodes.len() != n_t || field_spectrum.len() != n_t || weights.field_filter.len() != n_t {
        return Err(Error::GridMismatch(format!(
            "trajectory/spectrum/filter sizes {}/{}/{} do not match the {n_t}-node grid",
            traj.nodes.len(),
            field_spectrum.len(),
            weights.field_filter.len()
        )));
    }
    let tgrid = ct.tgrid();
    let dw = frequency_spacing(tgrid);
    let half = scalar::<R>(0.5);

    // Field penalty with hard exclusion outside the filter support.
    let mut j_penal = R::zero();
    for (k, (&f, &e)) in weights
        .field_filter
        .values
        .iter()
        .zip(&field_spectrum.values)
        .enumerate()
    {
        if f == R::zero() {
            if e != R::zero() {
                return Err(Error::FieldOutsideFilter {
                    bin: k,
                    value: e.to_f64().unwrap_or(f64::NAN),
                });
            }
            continue;
        }
        let c = if k == 0 { half } else { R::one() };
        j_penal -= c * e * e / f * dw;
    }

    // Emission yield in the target band.
    let a_bar = ct.forward(&projected_expectation_signal(traj, weights)?)?;
    let mut j_max = R::zero();
    for (k, (&f, &a)) in weights
        .target_filter
        .values
        .iter()
        .zip(&a_bar.values)
        .enumerate()
    {
        let c = if k == 0 { half } else { R::one() };
        j_max += half * c * f * a * a * dw;
    }

    // Forbidden-subspace penalty.
    let mut j_forb = R::zero();
    if let Some(pf) = &weights.subspace.forbidden {
        let dt = tgrid.dt();
        for node in &traj.nodes {
            j_forb -= pf.expectation(node)? * dt;
        }
    }

    let j_bound = bound_term(&traj.terminal, weights, model)?;

    Ok(JBreakdown {
        j_max,
        j_penal,
        j_forb,
        j_bound,
        j_total: j_max + j_penal + j_forb + j_bound,
    })
}

/// `-(kappa/2) (i <[H0, O]>(T))^2`, the terminal emission-rate penalty.
/// `<[H0, O]>` is purely imaginary for Hermitian `H0`, `O`, so the term is
/// `-(kappa/2) Im(<[H0,O]>)^2 <= 0`.
fn bound_term<R: Real>(
    psi_t: &StateVector<R>,
    weights: &FunctionalWeights<R>,
    model: &HamiltonianModel<R>,
) -> Result<R> {
    if weights.kappa == R::zero() {
        return Ok(R::zero());
    }
    check_mu_target_commute(weights, model, psi_t.basis)?;
    let b = commutator_bracket(psi_t, &weights.target, model)?;
    Ok(-weights.kappa * scalar::<R>(0.5) * b.im * b.im)
}

fn check_mu_target_commute<R: Real>(
    weights: &FunctionalWeights<R>,
    model: &HamiltonianModel<R>,
    basis: BasisKind,
) -> Result<()> {
    let dev = commutator_max_abs(&model.mu, &weights.target, basis);
    if dev > scalar::<R>(1e-10) {
        return Err(Error::Unsupported(format!(
            "terminal penalty requires a target commuting with the dipole (deviation {dev})"
        )));
    }
    Ok(())
}

/// `<psi|[H0, O]|psi>` (purely imaginary up to roundoff).
fn commutator_bracket<R: Real>(
    psi: &StateVector<R>,
    target: &Operator<R>,
    model: &HamiltonianModel<R>,
) -> Result<Complex<R>> {
    let comm_psi = model.apply_h0_commutator(target, psi)?;
    Ok(psi.inner(&comm_psi))
}

/// Terminal condition of the costate,
/// `chi(T) = kappa <[H0, O]>(T) [H0, O] psi(T)`, or the zero vector when
/// `kappa = 0` (the natural boundary condition). Requires `[mu, O] = 0`.
pub fn chi_terminal<R: Real>(
    psi_t: &StateVector<R>,
    weights: &FunctionalWeights<R>,
    model: &HamiltonianModel<R>,
) -> Result<StateVector<R>> {
    if weights.kappa == R::zero() {
        return Ok(StateVector::zeros(psi_t.len(), psi_t.basis));
    }
    check_mu_target_commute(weights, model, psi_t.basis)?;
    let mut comm_psi = model.apply_h0_commutator(&weights.target, psi_t)?;
    let b = psi_t.inner(&comm_psi);
    let c = Complex::new(weights.kappa, R::zero()) * b;
    comm_psi.scale(c);
    Ok(comm_psi)
}

/// Inhomogeneous vector of the costate equation,
/// `G(t) = -(c(t) O_a - P_f) psi(t)` with
/// `c(t) = C^{-1}[f_O(w) <O_a>bar(w)](t)`.
///
/// `c` is built once (one forward transform, then the band-limited
/// interpolant); `psi(t)` between stored nodes is recovered by a short
/// local propagation from the nearest node.
pub struct AdjointSource<'a, R: Real> {
    c: Option<SpectrumInterpolant<R>>,
    o_a: &'a Operator<R>,
    forbidden: Option<&'a Operator<R>>,
    traj: &'a Trajectory<R>,
    tgrid: TimeGrid<R>,
    model: &'a HamiltonianModel<R>,
    field: &'a dyn ControlField<R>,
    local_tol: R,
}

pub fn adjoint_source<'a, R: Real>(
    traj: &'a Trajectory<R>,
    weights: &'a FunctionalWeights<R>,
    ct: &CosineTransform<R>,
    model: &'a HamiltonianModel<R>,
    field: &'a dyn ControlField<R>,
    propagation_tol: R,
) -> Result<AdjointSource<'a, R>> {
    if traj.nodes.len() != ct.n_t() {
        return Err(Error::GridMismatch(format!(
            "trajectory has {} nodes, grid has {}",
            traj.nodes.len(),
            ct.n_t()
        )));
    }
    let a_bar = ct.forward(&projected_expectation_signal(traj, weights)?)?;
    let filtered = weights.target_filter.apply(&a_bar)?;
    let c = if filtered.values.iter().all(|&v| v == R::zero()) {
        None
    } else {
        Some(SpectrumInterpolant::new(&filtered, ct.tgrid()))
    };
    let tgrid = ct.tgrid().clone();
    let local_tol = propagation_tol * tgrid.dt() / tgrid.total_time;
    Ok(AdjointSource {
        c,
        o_a: weights.target_projected(),
        forbidden: weights.subspace.forbidden.as_ref(),
        traj,
        tgrid,
        model,
        field,
        local_tol,
    })
}

impl<R: Real> SourceTerm<R> for AdjointSource<'_, R> {
    fn eval(&self, t: R, out: &mut [Complex<R>]) {
        let j = self.tgrid.nearest_node(t);
        let mut psi = self.traj.node(j).clone();
        if evolve_state(
            self.model,
            self.field,
            &mut psi,
            self.tgrid.node(j),
            t,
            self.local_tol,
        )
        .is_err()
        {
            // Poison the output; the adaptive integrator rejects it.
            for o in out.iter_mut() {
                *o = Complex::new(R::nan(), R::nan());
            }
            return;
        }
        match &self.c {
            Some(interp) => {
                self.o_a.apply_to(&psi.amplitudes, out);
                let neg_c = Complex::new(-interp.value(t), R::zero());
                for o in out.iter_mut() {
                    *o *= neg_c;
                }
            }
            None => {
                for o in out.iter_mut() {
                    *o = Complex::new(R::zero(), R::zero());
                }
            }
        }
        if let Some(pf) = self.forbidden {
            let mut pf_psi = vec![Complex::new(R::zero(), R::zero()); psi.len()];
            pf.apply_to(&psi.amplitudes, &mut pf_psi);
            for (o, p) in out.iter_mut().zip(&pf_psi) {
                *o += *p;
            }
        }
    }

    fn is_zero(&self) -> bool {
        self.c.is_none() && self.forbidden.is_none()
    }
}

/// Total derivative of the objective with respect to the field spectrum:
/// `g(w_k) = -2 eps(w_k)/f_eps(w_k) - 2 Im C[<chi|mu|psi>](w_k)` where the
/// field filter is positive, and exactly 0 on excluded bins. Vanishes at a
/// self-consistent optimum.
pub fn gradient_spectrum<R: Real>(
    psi_traj: &Trajectory<R>,
    chi_traj: &Trajectory<R>,
    model: &HamiltonianModel<R>,
    weights: &FunctionalWeights<R>,
    field_spectrum: &Spectrum<R>,
    ct: &CosineTransform<R>,
) -> Result<Spectrum<R>> {
    let n_t = ct.n_t();
    if psi_traj.nodes.len() != n_t || chi_traj.nodes.len() != n_t || field_spectrum.len() != n_t {
        return Err(Error::GridMismatch(
            "trajectories and spectrum must share the time grid".into(),
        ));
    }
    let overlap = overlap_signal(psi_traj, chi_traj, model)?;
    let m_bar = ct.forward(&overlap)?;
    let two = scalar::<R>(2.0);
    let values = weights
        .field_filter
        .values
        .iter()
        .zip(&field_spectrum.values)
        .zip(&m_bar.values)
        .map(|((&f, &e), &m)| {
            if f == R::zero() {
                R::zero()
            } else {
                -two * e / f - two * m
            }
        })
        .collect();
    Ok(Spectrum::new(values))
}

/// `Im <chi(t_j)|mu|psi(t_j)>` on every node.
pub fn overlap_signal<R: Real>(
    psi_traj: &Trajectory<R>,
    chi_traj: &Trajectory<R>,
    model: &HamiltonianModel<R>,
) -> Result<TimeSignal<R>> {
    if psi_traj.nodes.len() != chi_traj.nodes.len() {
        return Err(Error::GridMismatch(
            "trajectories must share the time grid".into(),
        ));
    }
    let mut values = Vec::with_capacity(psi_traj.nodes.len());
    for (psi, chi) in psi_traj.nodes.iter().zip(&chi_traj.nodes) {
        let mu_psi = model.mu.apply(psi)?;
        values.push(chi.inner(&mu_psi).im);
    }
    Ok(TimeSignal::new(values))
}
