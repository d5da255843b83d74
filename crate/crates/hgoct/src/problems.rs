//! Built-in benchmark problems: a two-level system driven at a third of its
//! gap, an 11-level ladder, an HCl vibrational (Morse) model, and a 1-D
//! soft-core Coulomb atom. All quantities are in atomic units.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::functional::{FunctionalWeights, SubspaceSpec};
use crate::optimizer::GammaSchedule;
use crate::quantum::eigen::eigensolve;
use crate::quantum::grid::{SpatialGrid, TimeGrid};
use crate::quantum::hamiltonian::HamiltonianModel;
use crate::quantum::operator::Operator;
use crate::quantum::state::{BasisKind, StateVector};
use crate::spectral::{frequency, FilterFunction, FilterRole, Spectrum};
use crate::{scalar, Complex, Real};

/// Heaviside step with the closed-edge convention `theta(0) = 1`.
pub fn theta<R: Real>(x: R) -> R {
    if x >= R::zero() {
        R::one()
    } else {
        R::zero()
    }
}

pub fn sech<R: Real>(x: R) -> R {
    R::one() / Float::cosh(x)
}

/// Morse potential `D0 (exp(-a x) - 1)^2`.
pub fn morse_potential<R: Real>(x: R, d0: R, a: R) -> R {
    let e = Float::exp(-a * x) - R::one();
    d0 * e * e
}

/// HCl dipole function
/// `0.19309 x {1 - Re tanh[(0.17069 + 0.056854 i)(x - 0.10630)^1.8977]}`
/// with the principal branch of the complex power.
pub fn hcl_dipole<R: Real>(x: R) -> R {
    let a1 = scalar::<R>(0.19309);
    let a2 = Complex::new(scalar::<R>(0.17069), scalar::<R>(0.056854));
    let a3 = scalar::<R>(0.10630);
    let a4 = scalar::<R>(1.8977);
    let base = x - a3;
    let powed = if base == R::zero() {
        Complex::new(R::zero(), R::zero())
    } else {
        // Principal branch: |b|^p e^{i p Arg b}, Arg b in {0, pi}.
        let arg = if base > R::zero() { R::zero() } else { R::PI() };
        Complex::from_polar(Float::powf(Float::abs(base), a4), a4 * arg)
    };
    let t = (a2 * powed).tanh();
    a1 * x * (R::one() - t.re)
}

/// A fully specified optimization problem: system, grids, objective
/// weights, initial field, and relaxation defaults.
#[derive(Debug, Clone)]
pub struct ProblemSpec<R: Real> {
    pub name: String,
    pub model: HamiltonianModel<R>,
    pub psi0: StateVector<R>,
    pub tgrid: TimeGrid<R>,
    pub weights: FunctionalWeights<R>,
    pub initial_spectrum: Spectrum<R>,
    pub grid: Option<SpatialGrid<R>>,
    /// All eigenpairs of the drift Hamiltonian, energies ascending.
    pub eigenpairs: Vec<(R, StateVector<R>)>,
    pub k_init: R,
    pub tau: R,
    pub gamma_schedule: Option<GammaSchedule<R>>,
}

impl<R: Real> ProblemSpec<R> {
    /// All consistency violations, empty when the spec is runnable.
    pub fn validation_report(&self) -> Vec<String> {
        let mut report = Vec::new();
        let n_t = self.tgrid.n_t;
        if self.psi0.len() != self.model.dim() {
            report.push(format!(
                "initial state dimension {} does not match the model dimension {}",
                self.psi0.len(),
                self.model.dim()
            ));
        }
        let norm_dev = Float::abs(self.psi0.norm() - R::one());
        if norm_dev > scalar::<R>(1e-8) {
            report.push(format!(
                "initial state is not normalized (deviation {norm_dev})"
            ));
        }
        if self.weights.field_filter.len() != n_t {
            report.push(format!(
                "field filter has {} bins, expected {n_t}",
                self.weights.field_filter.len()
            ));
        }
        if self.weights.target_filter.len() != n_t {
            report.push(format!(
                "target filter has {} bins, expected {n_t}",
                self.weights.target_filter.len()
            ));
        }
        if self.initial_spectrum.len() != n_t {
            report.push(format!(
                "initial field spectrum has {} bins, expected {n_t}",
                self.initial_spectrum.len()
            ));
        } else if self.weights.field_filter.len() == n_t {
            for (k, (&f, &e)) in self
                .weights
                .field_filter
                .values
                .iter()
                .zip(&self.initial_spectrum.values)
                .enumerate()
            {
                if f == R::zero() && e != R::zero() {
                    report.push(format!(
                        "field outside filter support: bin {k} holds {e} where the filter is 0"
                    ));
                    break;
                }
            }
        }
        if !self.initial_spectrum.is_finite() {
            report.push("initial field spectrum contains non-finite values".into());
        }
        if !(self.k_init > R::zero() && self.k_init <= R::one()) {
            report.push(format!("K_init must be in (0, 1], got {}", self.k_init));
        }
        if self.tau <= R::zero() {
            report.push(format!("tau must be positive, got {}", self.tau));
        }
        if let Some(grid) = &self.grid {
            if grid.n_x != self.model.dim() {
                report.push(format!(
                    "spatial grid has {} points, model dimension is {}",
                    grid.n_x,
                    self.model.dim()
                ));
            }
        }
        report
    }

    pub fn validate(&self) -> Result<()> {
        let report = self.validation_report();
        if report.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidValue(report.join("; ")))
        }
    }

    /// Population of `psi` in eigenstates above `level` (strictly `n > level`).
    pub fn population_above(&self, psi: &StateVector<R>, level: usize) -> R {
        self.eigenpairs
            .iter()
            .skip(level + 1)
            .map(|(_, v)| v.inner(psi).norm_sqr())
            .sum()
    }
}

fn sample_filter<R: Real>(
    tgrid: &TimeGrid<R>,
    role: FilterRole,
    f: impl Fn(R) -> R,
) -> FilterFunction<R> {
    FilterFunction::sample(tgrid, role, f).expect("built-in filters are finite and non-negative")
}

fn sample_spectrum<R: Real>(tgrid: &TimeGrid<R>, f: impl Fn(R) -> R) -> Spectrum<R> {
    Spectrum::new((0..tgrid.n_t).map(|k| f(frequency(tgrid, k))).collect())
}

/// Two-level system, gap 3, driven through its filtered third subharmonic.
pub fn build_tls<R: Real>() -> ProblemSpec<R> {
    build_tls_sized(4096)
}

pub fn build_tls_sized<R: Real>(n_t: usize) -> ProblemSpec<R> {
    let h0 = Operator::dense_real(2, &[1.0, 0.0, 0.0, 4.0]).expect("diagonal");
    let mu = Operator::dense_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("symmetric");
    let model = HamiltonianModel::new(vec![h0], mu).expect("matching dims");
    let tgrid = TimeGrid::new(scalar::<R>(100.0), n_t);
    let hat = |w: R| sech(scalar::<R>(20.0) * Float::powi(w - R::one(), 4));
    let field_filter = sample_filter(&tgrid, FilterRole::FieldPenalty, |w| {
        scalar::<R>(20.0) * hat(w)
    });
    let target_filter = sample_filter(&tgrid, FilterRole::Target, |w| {
        Float::exp(-scalar::<R>(10.0) * Float::powi(w - scalar::<R>(3.0), 2))
    });
    let weights = FunctionalWeights::new(
        field_filter,
        target_filter,
        R::zero(),
        SubspaceSpec::unrestricted(),
        model.mu.clone(),
        BasisKind::Levels,
    )
    .expect("valid weights");
    let eigenpairs = eigensolve(&model, None, 2).expect("2x2 diagonalization");
    ProblemSpec {
        name: "tls".into(),
        psi0: StateVector::from_real_levels(&[1.0, 0.0]),
        initial_spectrum: sample_spectrum(&tgrid, hat),
        model,
        tgrid,
        weights,
        grid: None,
        eigenpairs,
        k_init: scalar(0.5),
        tau: scalar(1e-3),
        gamma_schedule: None,
    }
}

/// Eleven-level ladder with nearest-neighbor couplings and an outer-state
/// coupling, targeting the tenth harmonic band.
pub fn build_11ls<R: Real>() -> ProblemSpec<R> {
    build_11ls_sized(4096)
}

pub fn build_11ls_sized<R: Real>(n_t: usize) -> ProblemSpec<R> {
    const N: usize = 11;
    let energies = [1.0, 2.1, 3.0, 3.9, 5.0, 6.1, 7.0, 8.1, 9.0, 9.9, 11.0];
    let mut h0 = vec![0.0; N * N];
    for (n, &e) in energies.iter().enumerate() {
        h0[n * N + n] = e;
    }
    let mut mu = vec![0.0; N * N];
    for n in 0..N - 1 {
        mu[n * N + n + 1] = 1.0;
        mu[(n + 1) * N + n] = 1.0;
    }
    mu[N - 1] = 1.0; // (0, 10)
    mu[(N - 1) * N] = 1.0;
    let h0 = Operator::dense_real(N, &h0).expect("diagonal");
    let mu = Operator::dense_real(N, &mu).expect("symmetric");
    let model = HamiltonianModel::new(vec![h0], mu).expect("matching dims");
    let tgrid = TimeGrid::new(scalar::<R>(100.0), n_t);
    let field_filter = sample_filter(&tgrid, FilterRole::FieldPenalty, |w| {
        scalar::<R>(50.0) * theta(scalar::<R>(1.3) - w)
    });
    let target_filter = sample_filter(&tgrid, FilterRole::Target, |w| {
        theta(w - scalar::<R>(9.9)) * theta(scalar::<R>(10.1) - w)
    });
    let weights = FunctionalWeights::new(
        field_filter,
        target_filter,
        R::zero(),
        SubspaceSpec::unrestricted(),
        model.mu.clone(),
        BasisKind::Levels,
    )
    .expect("valid weights");
    let eigenpairs = eigensolve(&model, None, N).expect("11x11 diagonalization");
    let mut psi0 = vec![0.0; N];
    psi0[0] = 1.0;
    ProblemSpec {
        name: "11ls".into(),
        psi0: StateVector::from_real_levels(&psi0),
        initial_spectrum: sample_spectrum(&tgrid, |w| theta(scalar::<R>(1.3) - w)),
        model,
        tgrid,
        weights,
        grid: None,
        eigenpairs,
        k_init: R::one(),
        tau: scalar(1e-3),
        gamma_schedule: None,
    }
}

/// HCl vibrational model: Morse potential, tanh-form dipole, energy-space
/// subspace restriction below dissociation.
pub fn build_hcl<R: Real>() -> Result<ProblemSpec<R>> {
    build_hcl_sized(scalar::<R>(1e4), 4096)
}

pub fn build_hcl_sized<R: Real>(total_time: R, n_t: usize) -> Result<ProblemSpec<R>> {
    const N_X: usize = 32;
    const L_ALLOWED: usize = 19;
    let mass = scalar::<R>(1785.0);
    let d0 = scalar::<R>(0.171);
    let a = scalar::<R>(0.975);
    let grid = SpatialGrid::new(scalar::<R>(-0.69407), scalar::<R>(3.51178), N_X);
    let kinetic = Operator::momentum_diagonal(&grid, |k| k * k / (scalar::<R>(2.0) * mass));
    let potential = Operator::spatial_diagonal(grid.sample(|x| morse_potential(x, d0, a)));
    let mu = Operator::spatial_diagonal(grid.sample(hcl_dipole));
    let model = HamiltonianModel::new(vec![kinetic, potential], mu)?;
    let eigenpairs = eigensolve(&model, Some(&grid), N_X)?;
    let psi0 = eigenpairs[0].1.clone();

    let s: Vec<R> = (0..N_X)
        .map(|n| if n <= L_ALLOWED { R::one() } else { R::zero() })
        .collect();
    let gamma: Vec<R> = (0..N_X)
        .map(|n| {
            if n <= L_ALLOWED {
                R::zero()
            } else {
                scalar::<R>(((n - L_ALLOWED) * (n - L_ALLOWED)) as f64)
            }
        })
        .collect();
    let subspace = SubspaceSpec::from_eigenbasis(&eigenpairs, Some(&s), Some(&gamma))?;

    let tgrid = TimeGrid::new(total_time, n_t);
    let field_filter = sample_filter(&tgrid, FilterRole::FieldPenalty, |w| {
        scalar::<R>(2500.0) * theta(scalar::<R>(0.015) - w)
    });
    let target_filter = sample_filter(&tgrid, FilterRole::Target, |w| {
        scalar::<R>(100.0) * theta(w - scalar::<R>(0.025)) * theta(scalar::<R>(0.027) - w)
    });
    let weights = FunctionalWeights::new(
        field_filter,
        target_filter,
        R::zero(),
        subspace,
        model.mu.clone(),
        BasisKind::SpatialGrid,
    )?;
    Ok(ProblemSpec {
        name: "hcl".into(),
        psi0,
        initial_spectrum: sample_spectrum(&tgrid, |w| theta(scalar::<R>(0.015) - w)),
        model,
        tgrid,
        weights,
        grid: Some(grid),
        eigenpairs,
        k_init: R::one(),
        tau: scalar(1e-3),
        gamma_schedule: None,
    })
}

/// 1-D soft-core Coulomb atom with a spatial interior window as the allowed
/// subspace and a weak absorbing penalty near the grid edges.
pub fn build_coulomb<R: Real>() -> Result<ProblemSpec<R>> {
    build_coulomb_sized(scalar::<R>(2000.0), 2048)
}

pub fn build_coulomb_sized<R: Real>(total_time: R, n_t: usize) -> Result<ProblemSpec<R>> {
    const N_X: usize = 128;
    let grid = SpatialGrid::new(scalar::<R>(-40.0), scalar::<R>(40.0), N_X);
    let kinetic = Operator::momentum_diagonal(&grid, |k| k * k / scalar::<R>(2.0));
    let potential = Operator::spatial_diagonal(
        grid.sample(|x| R::one() - R::one() / Float::sqrt(x * x + R::one())),
    );
    let mu = Operator::spatial_diagonal(grid.points());
    let model = HamiltonianModel::new(vec![kinetic, potential], mu)?;
    let eigenpairs = eigensolve(&model, Some(&grid), N_X)?;
    let psi0 = eigenpairs[0].1.clone();

    let s_of = |x: R| {
        scalar::<R>(0.5) * (Float::tanh(x + scalar::<R>(35.0)) - Float::tanh(x - scalar::<R>(35.0)))
    };
    let s_vals = grid.sample(s_of);
    let gamma_vals: Vec<R> = s_vals
        .iter()
        .map(|&s| scalar::<R>(1e-3) * (R::one() - s))
        .collect();
    let subspace = SubspaceSpec::from_spatial(Some(s_vals), Some(gamma_vals))?;

    let tgrid = TimeGrid::new(total_time, n_t);
    let band = |w: R| R::one() - Float::tanh(scalar::<R>(100.0) * (w - scalar::<R>(0.07)));
    let field_filter = sample_filter(&tgrid, FilterRole::FieldPenalty, |w| {
        scalar::<R>(5e4) * band(w)
    });
    let target_filter = sample_filter(&tgrid, FilterRole::Target, |w| {
        theta(w - scalar::<R>(0.61)) * theta(scalar::<R>(0.63) - w)
    });
    let weights = FunctionalWeights::new(
        field_filter,
        target_filter,
        R::zero(),
        subspace,
        model.mu.clone(),
        BasisKind::SpatialGrid,
    )?;
    Ok(ProblemSpec {
        name: "coulomb".into(),
        psi0,
        initial_spectrum: sample_spectrum(&tgrid, |w| scalar::<R>(0.3) * band(w)),
        model,
        tgrid,
        weights,
        grid: Some(grid),
        eigenpairs,
        k_init: scalar(1e-6),
        tau: scalar(5e-4),
        // Edge-penalty growth against late-stage boundary artifacts.
        gamma_schedule: Some(GammaSchedule {
            factor: scalar(2.0),
            every: 100,
        }),
    })
}

/// Build a problem by its command-line name.
pub fn build_by_name<R: Real>(name: &str) -> Result<ProblemSpec<R>> {
    match name {
        "tls" => Ok(build_tls()),
        "11ls" => Ok(build_11ls()),
        "hcl" => build_hcl(),
        "coulomb" => build_coulomb(),
        other => Err(Error::InvalidValue(format!("unknown problem '{other}'"))),
    }
}
