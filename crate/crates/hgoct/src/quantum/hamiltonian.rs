use num_traits::Float;

use crate::error::{Error, Result};
use crate::quantum::operator::Operator;
use crate::quantum::state::StateVector;
use crate::{Complex, Real};

/// Drift Hamiltonian plus dipole coupling, `H(t) = H0 - mu * eps(t)`.
///
/// `H0` is a sum of terms so that grid problems can combine a
/// momentum-diagonal kinetic part with a spatial-diagonal potential.
#[derive(Debug, Clone)]
pub struct HamiltonianModel<R: Real> {
    pub h0_terms: Vec<Operator<R>>,
    pub mu: Operator<R>,
}

impl<R: Real> HamiltonianModel<R> {
    pub fn new(h0_terms: Vec<Operator<R>>, mu: Operator<R>) -> Result<Self> {
        let dim = mu.dim();
        if h0_terms.is_empty() {
            return Err(Error::InvalidValue("H0 must have at least one term".into()));
        }
        for t in &h0_terms {
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.dim(),
                });
            }
        }
        Ok(Self { h0_terms, mu })
    }

    pub fn dim(&self) -> usize {
        self.mu.dim()
    }

    /// `H0 · input -> out`, using `scratch` for term accumulation.
    pub fn apply_h0_to(&self, input: &[Complex<R>], out: &mut [Complex<R>], scratch: &mut [Complex<R>]) {
        self.h0_terms[0].apply_to(input, out);
        for term in &self.h0_terms[1..] {
            term.apply_to(input, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += *s;
            }
        }
    }

    /// `(H0 - eps * mu) · input -> out`.
    pub fn apply_h_to(
        &self,
        eps: R,
        input: &[Complex<R>],
        out: &mut [Complex<R>],
        scratch: &mut [Complex<R>],
    ) {
        self.apply_h0_to(input, out, scratch);
        if eps != R::zero() {
            self.mu.apply_to(input, scratch);
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o -= *s * eps;
            }
        }
    }

    pub fn apply_h0(&self, psi: &StateVector<R>) -> Result<StateVector<R>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.len(),
            });
        }
        let mut out = StateVector::zeros(psi.len(), psi.basis);
        let mut scratch = vec![Complex::new(R::zero(), R::zero()); psi.len()];
        self.apply_h0_to(&psi.amplitudes, &mut out.amplitudes, &mut scratch);
        Ok(out)
    }

    pub fn h0_norm_bound(&self) -> R {
        self.h0_terms
            .iter()
            .map(|t| t.norm_bound())
            .fold(R::zero(), |a, b| a + b)
    }

    /// Norm bound of `H(t)` for a given field magnitude.
    pub fn h_norm_bound(&self, eps_abs: R) -> R {
        self.h0_norm_bound() + Float::abs(eps_abs) * self.mu.norm_bound()
    }

    /// Apply the commutator `[H0, A]` to a state.
    pub fn apply_h0_commutator(&self, a: &Operator<R>, psi: &StateVector<R>) -> Result<StateVector<R>> {
        let a_psi = a.apply(psi)?;
        let h0_a_psi = self.apply_h0(&a_psi)?;
        let h0_psi = self.apply_h0(psi)?;
        let a_h0_psi = a.apply(&h0_psi)?;
        let mut out = h0_a_psi;
        for (o, s) in out.amplitudes.iter_mut().zip(&a_h0_psi.amplitudes) {
            *o -= *s;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::state::BasisKind;

    #[test]
    fn coupling_sign_convention() {
        // H(t) psi = H0 psi - eps * mu psi for a 2-level model.
        let h0 = Operator::<f64>::dense_real(2, &[1.0, 0.0, 0.0, 4.0]).unwrap();
        let mu = Operator::dense_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let model = HamiltonianModel::new(vec![h0], mu).unwrap();
        let psi = StateVector::new(
            vec![Complex::new(0.3, 0.1), Complex::new(-0.4, 0.8)],
            BasisKind::Levels,
        );
        let eps = 0.37;
        let mut out = vec![Complex::new(0.0, 0.0); 2];
        let mut scratch = out.clone();
        model.apply_h_to(eps, &psi.amplitudes, &mut out, &mut scratch);
        let h0_psi = [psi.amplitudes[0] * 1.0, psi.amplitudes[1] * 4.0];
        let mu_psi = [psi.amplitudes[1], psi.amplitudes[0]];
        for i in 0..2 {
            let expect = h0_psi[i] - mu_psi[i] * eps;
            assert!((out[i] - expect).norm() < 1e-15);
        }
    }
}
