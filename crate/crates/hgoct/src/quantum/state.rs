use num_traits::Float;

use crate::{Complex, Real};

/// Basis in which a state's amplitudes are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Abstract level basis (eigenstates or configuration labels).
    Levels,
    /// Position representation on a periodic spatial grid.
    SpatialGrid,
}

/// Complex amplitude vector over a finite basis.
///
/// States produced by homogeneous propagation from a normalized initial
/// state stay normalized to `1e-9`; costate vectors carry no normalization
/// requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<R: Real> {
    pub amplitudes: Vec<Complex<R>>,
    pub basis: BasisKind,
}

impl<R: Real> StateVector<R> {
    pub fn new(amplitudes: Vec<Complex<R>>, basis: BasisKind) -> Self {
        Self { amplitudes, basis }
    }

    pub fn zeros(len: usize, basis: BasisKind) -> Self {
        Self::new(vec![Complex::new(R::zero(), R::zero()); len], basis)
    }

    /// Real amplitudes in the level basis.
    pub fn from_real_levels(values: &[f64]) -> Self {
        Self::new(
            values
                .iter()
                .map(|&v| Complex::new(crate::scalar(v), R::zero()))
                .collect(),
            BasisKind::Levels,
        )
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sq(&self) -> R {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> R {
        Float::sqrt(self.norm_sq())
    }

    /// `<self|other>` with the physics convention (conjugate-linear in self).
    pub fn inner(&self, other: &Self) -> Complex<R> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scale(&mut self, c: Complex<R>) {
        for a in &mut self.amplitudes {
            *a *= c;
        }
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > R::zero() {
            let inv = Complex::new(R::one() / n, R::zero());
            self.scale(inv);
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes
            .iter()
            .all(|a| Float::is_finite(a.re) && Float::is_finite(a.im))
    }
}
