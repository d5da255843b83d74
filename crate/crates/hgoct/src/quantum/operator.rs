use std::fmt;
use std::sync::Arc;

use num_traits::Float;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::quantum::grid::SpatialGrid;
use crate::quantum::state::{BasisKind, StateVector};
use crate::{scalar, Complex, Real};

const HERMITICITY_TOL: f64 = 1e-12;

/// Dense Hermitian matrix, row-major.
#[derive(Clone)]
pub struct DenseOp<R: Real> {
    pub dim: usize,
    pub elems: Vec<Complex<R>>,
}

/// Diagonal operator in momentum space on a periodic grid; applied by FFT,
/// pointwise multiplication, inverse FFT.
#[derive(Clone)]
pub struct MomentumOp<R: Real> {
    pub values: Vec<R>,
    fft_fwd: Arc<dyn Fft<R>>,
    fft_inv: Arc<dyn Fft<R>>,
}

/// Hermitian operator in one of three representations.
#[derive(Clone)]
pub enum Operator<R: Real> {
    Dense(DenseOp<R>),
    /// Real multiplication operator in the position (or level) basis.
    SpatialDiagonal(Vec<R>),
    /// Real function of momentum on a periodic spatial grid.
    MomentumDiagonal(MomentumOp<R>),
}

impl<R: Real> fmt::Debug for Operator<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Dense(d) => write!(f, "Operator::Dense(dim={})", d.dim),
            Operator::SpatialDiagonal(v) => write!(f, "Operator::SpatialDiagonal(len={})", v.len()),
            Operator::MomentumDiagonal(m) => {
                write!(f, "Operator::MomentumDiagonal(len={})", m.values.len())
            }
        }
    }
}

impl<R: Real> Operator<R> {
    /// Dense Hermitian operator from row-major complex entries.
    pub fn dense(dim: usize, elems: Vec<Complex<R>>) -> Result<Self> {
        if elems.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: elems.len(),
            });
        }
        let mut dev = R::zero();
        for i in 0..dim {
            for j in 0..dim {
                let d = elems[i * dim + j] - elems[j * dim + i].conj();
                dev = Float::max(dev, Float::max(Float::abs(d.re), Float::abs(d.im)));
            }
        }
        if dev > scalar(HERMITICITY_TOL) {
            return Err(Error::NotHermitian(dev.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Operator::Dense(DenseOp { dim, elems }))
    }

    /// Dense Hermitian operator from row-major real entries.
    pub fn dense_real(dim: usize, elems: &[f64]) -> Result<Self> {
        Self::dense(
            dim,
            elems
                .iter()
                .map(|&v| Complex::new(scalar(v), R::zero()))
                .collect(),
        )
    }

    pub fn spatial_diagonal(values: Vec<R>) -> Self {
        Operator::SpatialDiagonal(values)
    }

    /// Diagonal-in-momentum operator `f(k)` on a periodic grid.
    pub fn momentum_diagonal(grid: &SpatialGrid<R>, f: impl Fn(R) -> R) -> Self {
        let values: Vec<R> = grid.wavenumbers().into_iter().map(f).collect();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(grid.n_x);
        let fft_inv = planner.plan_fft_inverse(grid.n_x);
        Operator::MomentumDiagonal(MomentumOp {
            values,
            fft_fwd,
            fft_inv,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Dense(d) => d.dim,
            Operator::SpatialDiagonal(v) => v.len(),
            Operator::MomentumDiagonal(m) => m.values.len(),
        }
    }

    /// `op · input -> out`; buffers must have the operator's dimension.
    pub fn apply_to(&self, input: &[Complex<R>], out: &mut [Complex<R>]) {
        match self {
            Operator::Dense(d) => {
                for i in 0..d.dim {
                    let row = &d.elems[i * d.dim..(i + 1) * d.dim];
                    let mut acc = Complex::new(R::zero(), R::zero());
                    for (m, x) in row.iter().zip(input) {
                        acc += m * x;
                    }
                    out[i] = acc;
                }
            }
            Operator::SpatialDiagonal(v) => {
                for ((o, x), d) in out.iter_mut().zip(input).zip(v) {
                    *o = x * d;
                }
            }
            Operator::MomentumDiagonal(m) => {
                out.copy_from_slice(input);
                m.fft_fwd.process(out);
                let inv_n = R::one() / scalar::<R>(m.values.len() as f64);
                for (o, d) in out.iter_mut().zip(&m.values) {
                    *o *= *d * inv_n;
                }
                m.fft_inv.process(out);
            }
        }
    }

    /// `op · psi` as a new state.
    pub fn apply(&self, psi: &StateVector<R>) -> Result<StateVector<R>> {
        self.check_compatible(psi)?;
        let mut out = StateVector::zeros(psi.len(), psi.basis);
        self.apply_to(&psi.amplitudes, &mut out.amplitudes);
        Ok(out)
    }

    fn check_compatible(&self, psi: &StateVector<R>) -> Result<()> {
        if self.dim() != psi.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.len(),
            });
        }
        if matches!(self, Operator::MomentumDiagonal(_)) && psi.basis != BasisKind::SpatialGrid {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    /// `Re <psi|op|psi>`. The imaginary residual of the bracket must stay
    /// below `1e-10 * |psi|^2`.
    pub fn expectation(&self, psi: &StateVector<R>) -> Result<R> {
        let bracket = self.bracket(psi)?;
        let n2 = psi.norm_sq();
        if Float::abs(bracket.im) > scalar::<R>(1e-10) * n2 {
            return Err(Error::NumericalFailure(format!(
                "non-real expectation of a Hermitian operator: imaginary part {}",
                bracket.im
            )));
        }
        Ok(bracket.re)
    }

    /// Full complex bracket `<psi|op|psi>` without the Hermiticity check.
    pub fn bracket(&self, psi: &StateVector<R>) -> Result<Complex<R>> {
        let opsi = self.apply(psi)?;
        Ok(psi.inner(&opsi))
    }

    /// Upper bound on the operator norm (row-sum bound / max diagonal value).
    pub fn norm_bound(&self) -> R {
        match self {
            Operator::Dense(d) => {
                let mut best = R::zero();
                for i in 0..d.dim {
                    let s: R = d.elems[i * d.dim..(i + 1) * d.dim]
                        .iter()
                        .map(|e| e.norm())
                        .sum();
                    best = Float::max(best, s);
                }
                best
            }
            Operator::SpatialDiagonal(v) | Operator::MomentumDiagonal(MomentumOp { values: v, .. }) => v
                .iter()
                .fold(R::zero(), |acc, &x| Float::max(acc, Float::abs(x))),
        }
    }

    /// Scale the operator in place by a real factor (used by penalty schedules).
    pub fn scale_in_place(&mut self, factor: R) {
        match self {
            Operator::Dense(d) => {
                for e in &mut d.elems {
                    *e = *e * factor;
                }
            }
            Operator::SpatialDiagonal(v) => {
                for x in v {
                    *x *= factor;
                }
            }
            Operator::MomentumDiagonal(m) => {
                for x in &mut m.values {
                    *x *= factor;
                }
            }
        }
    }

    /// Dense matrix of the operator, built column by column.
    pub fn to_dense(&self, basis: BasisKind) -> Vec<Complex<R>> {
        let n = self.dim();
        let mut mat = vec![Complex::new(R::zero(), R::zero()); n * n];
        let mut unit = StateVector::zeros(n, basis);
        let mut col = StateVector::zeros(n, basis);
        for j in 0..n {
            unit.amplitudes[j] = Complex::new(R::one(), R::zero());
            self.apply_to(&unit.amplitudes, &mut col.amplitudes);
            unit.amplitudes[j] = Complex::new(R::zero(), R::zero());
            for i in 0..n {
                mat[i * n + j] = col.amplitudes[i];
            }
        }
        mat
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let op = Operator::<f64>::dense_real(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let psi = StateVector::new(vec![c(0.6, 0.2), c(0.0, -0.77)], BasisKind::Levels);
        let out = op.apply(&psi).unwrap();
        assert_eq!(out.amplitudes, psi.amplitudes);
    }

    #[test]
    fn sigma_x_flips_the_ground_level() {
        let mu = Operator::<f64>::dense_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let psi = StateVector::from_real_levels(&[1.0, 0.0]);
        let out = mu.apply(&psi).unwrap();
        assert_eq!(out.amplitudes[0], c(0.0, 0.0));
        assert_eq!(out.amplitudes[1], c(1.0, 0.0));
    }

    #[test]
    fn non_hermitian_matrix_is_rejected() {
        let err = Operator::<f64>::dense_real(2, &[0.0, 1.0, 0.5, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NotHermitian(_)));
    }

    #[test]
    fn momentum_diagonal_needs_a_grid_basis() {
        let grid = SpatialGrid::new(-1.0_f64, 1.0, 8);
        let op = Operator::momentum_diagonal(&grid, |k| k * k / 2.0);
        let psi = StateVector::from_real_levels(&[1.0; 8]).normalized();
        assert!(matches!(op.apply(&psi), Err(Error::BasisMismatch)));
    }

    #[test]
    fn kinetic_acts_as_k_squared_on_plane_waves() {
        // e^{ikx} on the grid is an exact eigenvector of the spectral
        // kinetic operator with eigenvalue k^2/(2m).
        let grid = SpatialGrid::new(-0.69407_f64, 3.51178, 32);
        let mass = 1785.0;
        let op = Operator::momentum_diagonal(&grid, |k| k * k / (2.0 * mass));
        let k = grid.wavenumbers()[3];
        let psi = StateVector::new(
            grid.points()
                .iter()
                .map(|&x| Complex::from_polar(1.0, k * x))
                .collect(),
            BasisKind::SpatialGrid,
        );
        let out = op.apply(&psi).unwrap();
        let expect = k * k / (2.0 * mass);
        for (o, p) in out.amplitudes.iter().zip(&psi.amplitudes) {
            assert!((o - p * expect).norm() < 1e-12 * expect.abs());
        }
    }

    #[test]
    fn expectation_matches_hand_values() {
        let sx = Operator::<f64>::dense_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let ground = StateVector::from_real_levels(&[1.0, 0.0]);
        assert_eq!(sx.expectation(&ground).unwrap(), 0.0);
        let plus = StateVector::from_real_levels(&[1.0, 1.0]).normalized();
        assert!((sx.expectation(&plus).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_dimension_mismatch_is_reported() {
        let op = Operator::<f64>::dense_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let psi = StateVector::from_real_levels(&[1.0, 0.0, 0.0]);
        assert!(matches!(
            op.apply(&psi),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
