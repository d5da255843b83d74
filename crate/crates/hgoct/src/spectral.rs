//! Cosine-transform pair linking time signals on midpoint nodes to
//! half-range frequency spectra, plus spectral filters and the band-limited
//! interpolant used to evaluate fields between grid nodes.
//!
//! Conventions: time nodes `t_j = (j + 1/2) dt`, frequency bins
//! `w_k = k pi / T` for `k = 0..n_t`. Forward transform
//! `S_k = sqrt(2/pi) dt sum_j s_j cos(w_k t_j)`; inverse
//! `s_j = sqrt(2/pi) dw (S_0/2 + sum_{k>=1} S_k cos(w_k t_j))`.
//! The pair is an exact bijection on the grid, and Parseval holds with
//! frequency quadrature weights `1/2, 1, 1, ...`.

use std::sync::Arc;

use num_traits::Float;
use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{Error, Result};
use crate::quantum::grid::TimeGrid;
use crate::quantum::propagate::ControlField;
use crate::{scalar, Real};

/// Real signal sampled on the midpoint time nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal<R: Real> {
    pub values: Vec<R>,
}

impl<R: Real> TimeSignal<R> {
    pub fn new(values: Vec<R>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![R::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `dt * sum_j s_j^2` — the time-domain quadrature of the square.
    pub fn energy(&self, tgrid: &TimeGrid<R>) -> R {
        let s: R = self.values.iter().map(|&v| v * v).sum();
        s * tgrid.dt()
    }
}

/// Real half-range spectrum on the bins `w_k = k pi / T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<R: Real> {
    pub values: Vec<R>,
}

impl<R: Real> Spectrum<R> {
    pub fn new(values: Vec<R>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![R::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `dw * (S_0^2/2 + sum_{k>=1} S_k^2)` — the frequency-domain quadrature
    /// matching `TimeSignal::energy` through Parseval.
    pub fn energy(&self, tgrid: &TimeGrid<R>) -> R {
        let dw = frequency_spacing(tgrid);
        let mut s = R::zero();
        for (k, &v) in self.values.iter().enumerate() {
            let w = if k == 0 { scalar::<R>(0.5) } else { R::one() };
            s += w * v * v;
        }
        s * dw
    }

    /// Quadrature-weighted L2 norm, `sqrt(energy)`.
    pub fn weighted_norm(&self, tgrid: &TimeGrid<R>) -> R {
        Float::sqrt(self.energy(tgrid))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| Float::is_finite(*v))
    }
}

/// Frequency bin spacing `dw = pi / T`.
pub fn frequency_spacing<R: Real>(tgrid: &TimeGrid<R>) -> R {
    R::PI() / tgrid.total_time
}

/// Frequency of bin `k`.
pub fn frequency<R: Real>(tgrid: &TimeGrid<R>, k: usize) -> R {
    frequency_spacing(tgrid) * scalar::<R>(k as f64)
}

/// Role a spectral filter plays in the control functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterRole {
    /// Field penalty weight: bins with value 0 are forbidden to the field.
    FieldPenalty,
    /// Emission target weight: selects the band whose yield is maximized.
    Target,
}

/// Non-negative spectral weight function sampled on the frequency bins.
#[derive(Debug, Clone)]
pub struct FilterFunction<R: Real> {
    pub values: Vec<R>,
    pub role: FilterRole,
}

impl<R: Real> FilterFunction<R> {
    pub fn new(values: Vec<R>, role: FilterRole) -> Result<Self> {
        if values.iter().any(|v| !Float::is_finite(*v) || *v < R::zero()) {
            return Err(Error::InvalidValue(
                "filter values must be finite and non-negative".into(),
            ));
        }
        Ok(Self { values, role })
    }

    pub fn sample(tgrid: &TimeGrid<R>, role: FilterRole, f: impl Fn(R) -> R) -> Result<Self> {
        let values = (0..tgrid.n_t).map(|k| f(frequency(tgrid, k))).collect();
        Self::new(values, role)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise product with a spectrum. Bins where the filter vanishes are
    /// set to exactly zero regardless of the input value.
    pub fn apply(&self, spectrum: &Spectrum<R>) -> Result<Spectrum<R>> {
        if self.len() != spectrum.len() {
            return Err(Error::GridMismatch(format!(
                "filter has {} bins, spectrum has {}",
                self.len(),
                spectrum.len()
            )));
        }
        Ok(Spectrum::new(
            self.values
                .iter()
                .zip(&spectrum.values)
                .map(|(&f, &s)| if f == R::zero() { R::zero() } else { f * s })
                .collect(),
        ))
    }
}

/// Planned cosine transforms for one time grid.
pub struct CosineTransform<R: Real> {
    tgrid: TimeGrid<R>,
    plan: Arc<dyn TransformType2And3<R>>,
}

impl<R: Real> CosineTransform<R> {
    pub fn new(tgrid: &TimeGrid<R>) -> Self {
        let mut planner = DctPlanner::new();
        let plan = planner.plan_dct2(tgrid.n_t);
        Self {
            tgrid: tgrid.clone(),
            plan,
        }
    }

    pub fn n_t(&self) -> usize {
        self.tgrid.n_t
    }

    pub fn tgrid(&self) -> &TimeGrid<R> {
        &self.tgrid
    }

    /// Time signal to half-range spectrum.
    pub fn forward(&self, signal: &TimeSignal<R>) -> Result<Spectrum<R>> {
        if signal.len() != self.tgrid.n_t {
            return Err(Error::GridMismatch(format!(
                "signal has {} samples, grid has {}",
                signal.len(),
                self.tgrid.n_t
            )));
        }
        let mut buf = signal.values.clone();
        self.plan.process_dct2(&mut buf);
        let scale = Float::sqrt(scalar::<R>(2.0) / R::PI()) * self.tgrid.dt();
        for v in &mut buf {
            *v *= scale;
        }
        Ok(Spectrum::new(buf))
    }

    /// Half-range spectrum back to the time signal. Exact inverse of
    /// `forward` on the grid.
    pub fn inverse(&self, spectrum: &Spectrum<R>) -> Result<TimeSignal<R>> {
        if spectrum.len() != self.tgrid.n_t {
            return Err(Error::GridMismatch(format!(
                "spectrum has {} bins, grid has {}",
                spectrum.len(),
                self.tgrid.n_t
            )));
        }
        let mut buf = spectrum.values.clone();
        self.plan.process_dct3(&mut buf);
        let scale = Float::sqrt(scalar::<R>(2.0) / R::PI()) * frequency_spacing(&self.tgrid);
        for v in &mut buf {
            *v *= scale;
        }
        Ok(TimeSignal::new(buf))
    }
}

/// Band-limited continuum reconstruction of a spectrum:
/// `s(t) = sqrt(2/pi) dw (S_0/2 + sum_{k>=1} S_k cos(w_k t))`.
///
/// Agrees with `CosineTransform::inverse` at the grid nodes and gives the
/// propagator a smooth field between them.
#[derive(Debug, Clone)]
pub struct SpectrumInterpolant<R: Real> {
    coeffs: Vec<R>,
    dw: R,
}

impl<R: Real> SpectrumInterpolant<R> {
    pub fn new(spectrum: &Spectrum<R>, tgrid: &TimeGrid<R>) -> Self {
        let dw = frequency_spacing(tgrid);
        let scale = Float::sqrt(scalar::<R>(2.0) / R::PI()) * dw;
        let mut coeffs: Vec<R> = spectrum.values.iter().map(|&v| v * scale).collect();
        if let Some(c0) = coeffs.first_mut() {
            *c0 *= scalar::<R>(0.5);
        }
        // Band-limited spectra end in a long run of exact zeros; dropping
        // them shortens every field evaluation without changing the value.
        let last = coeffs.iter().rposition(|&c| c != R::zero());
        coeffs.truncate(last.map_or(0, |i| i + 1));
        Self { coeffs, dw }
    }
}

impl<R: Real> ControlField<R> for SpectrumInterpolant<R> {
    fn value(&self, t: R) -> R {
        let mut acc = R::zero();
        // Recur cos(k dw t) with the Chebyshev two-term recurrence to avoid
        // n_t trig calls per evaluation.
        let (s, c) = Float::sin_cos(self.dw * t);
        let _ = s;
        let mut ck_prev = R::one(); // cos(0)
        let mut ck = c; // cos(dw t)
        for (k, &a) in self.coeffs.iter().enumerate() {
            let cos_k = match k {
                0 => R::one(),
                1 => ck,
                _ => {
                    let next = scalar::<R>(2.0) * c * ck - ck_prev;
                    ck_prev = ck;
                    ck = next;
                    next
                }
            };
            acc += a * cos_k;
        }
        acc
    }
}
