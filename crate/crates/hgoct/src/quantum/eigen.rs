use nalgebra::DMatrix;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quantum::grid::SpatialGrid;
use crate::quantum::hamiltonian::HamiltonianModel;
use crate::quantum::state::{BasisKind, StateVector};
use crate::{scalar, Complex, Real};

/// Lowest `n_states` eigenpairs of the drift Hamiltonian, energies ascending,
/// states orthonormal. The dense matrix is assembled by applying `H0` to the
/// basis vectors, so grid Hamiltonians are diagonalized in exactly the
/// representation the propagator uses.
pub fn eigensolve<R: Real>(
    model: &HamiltonianModel<R>,
    grid: Option<&SpatialGrid<R>>,
    n_states: usize,
) -> Result<Vec<(R, StateVector<R>)>> {
    let n = model.dim();
    if n_states > n {
        return Err(Error::InvalidValue(format!(
            "requested {n_states} eigenstates from a {n}-dimensional basis"
        )));
    }
    let basis = if grid.is_some() {
        BasisKind::SpatialGrid
    } else {
        BasisKind::Levels
    };

    // Assemble H0 column by column.
    let mut mat = vec![Complex::new(R::zero(), R::zero()); n * n];
    {
        let mut unit = vec![Complex::new(R::zero(), R::zero()); n];
        let mut col = unit.clone();
        let mut scratch = unit.clone();
        for j in 0..n {
            unit[j] = Complex::new(R::one(), R::zero());
            model.apply_h0_to(&unit, &mut col, &mut scratch);
            unit[j] = Complex::new(R::zero(), R::zero());
            for i in 0..n {
                mat[i * n + j] = col[i];
            }
        }
    }

    let scale = Float::max(model.h0_norm_bound(), R::one());
    let max_imag = mat
        .iter()
        .fold(R::zero(), |a, e| Float::max(a, Float::abs(e.im)));

    let pairs = if max_imag <= scalar::<R>(1e-12) * scale {
        solve_real_symmetric(&mat, n, basis)
    } else {
        solve_hermitian_embedded(&mat, n, basis)
    };

    let mut pairs = pairs;
    pairs.truncate(n_states);

    // Deterministic phase: largest-magnitude component real and positive.
    for (_, v) in &mut pairs {
        let mut best = 0usize;
        let mut best_mag = R::zero();
        for (i, a) in v.amplitudes.iter().enumerate() {
            let m = a.norm_sqr();
            if m > best_mag {
                best_mag = m;
                best = i;
            }
        }
        let a = v.amplitudes[best];
        let mag = a.norm();
        if mag > R::zero() {
            let phase = Complex::new(a.re / mag, -a.im / mag);
            v.scale(phase);
        }
    }

    // Residual contract: |H0 v - E v| <= 1e-8 |E| + 1e-10.
    let mut scratch_a = vec![Complex::new(R::zero(), R::zero()); n];
    let mut scratch_b = scratch_a.clone();
    for (e, v) in &pairs {
        model.apply_h0_to(&v.amplitudes, &mut scratch_a, &mut scratch_b);
        let mut res_sq = R::zero();
        for (h, x) in scratch_a.iter().zip(&v.amplitudes) {
            let d = *h - *x * *e;
            res_sq += d.norm_sqr();
        }
        let res = Float::sqrt(res_sq);
        if res > scalar::<R>(1e-8) * Float::abs(*e) + scalar::<R>(1e-10) {
            return Err(Error::EigenFailure(format!(
                "residual {res} exceeds tolerance for eigenvalue {e}"
            )));
        }
    }

    Ok(pairs)
}

fn solve_real_symmetric<R: Real>(
    mat: &[Complex<R>],
    n: usize,
    basis: BasisKind,
) -> Vec<(R, StateVector<R>)> {
    let mut m = DMatrix::<R>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // Symmetrize to scrub FFT roundoff.
            m[(i, j)] = (mat[i * n + j].re + mat[j * n + i].re) * scalar::<R>(0.5);
        }
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues must be finite")
    });
    order
        .into_iter()
        .map(|idx| {
            let col = eig.eigenvectors.column(idx);
            let v = StateVector::new(
                col.iter().map(|&x| Complex::new(x, R::zero())).collect(),
                basis,
            );
            (eig.eigenvalues[idx], v)
        })
        .collect()
}

/// Complex Hermitian `A = B + iC` via the real-symmetric embedding
/// `[[B, -C], [C, B]]`; each eigenvalue appears twice, so independent
/// complex eigenvectors are selected by projecting out previous picks.
fn solve_hermitian_embedded<R: Real>(
    mat: &[Complex<R>],
    n: usize,
    basis: BasisKind,
) -> Vec<(R, StateVector<R>)> {
    let two_n = 2 * n;
    let mut m = DMatrix::<R>::zeros(two_n, two_n);
    for i in 0..n {
        for j in 0..n {
            let e = mat[i * n + j];
            m[(i, j)] = e.re;
            m[(i + n, j + n)] = e.re;
            m[(i, j + n)] = -e.im;
            m[(i + n, j)] = e.im;
        }
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..two_n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues must be finite")
    });

    let mut kept: Vec<(R, StateVector<R>)> = Vec::with_capacity(n);
    for idx in order {
        if kept.len() == n {
            break;
        }
        let col = eig.eigenvectors.column(idx);
        let mut v = StateVector::new(
            (0..n)
                .map(|i| Complex::new(col[i], col[i + n]))
                .collect(),
            basis,
        );
        // Orthogonalize against already-kept vectors of the same eigenvalue.
        for (e_prev, v_prev) in kept.iter().rev() {
            if Float::abs(*e_prev - eig.eigenvalues[idx])
                > scalar::<R>(1e-8) * (Float::abs(*e_prev) + R::one())
            {
                break;
            }
            let overlap = v_prev.inner(&v);
            for (a, b) in v.amplitudes.iter_mut().zip(&v_prev.amplitudes) {
                *a -= overlap * b;
            }
        }
        if v.norm() > scalar::<R>(1e-6) {
            kept.push((eig.eigenvalues[idx], v.normalized()));
        }
    }
    kept
}
