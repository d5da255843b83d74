//! Frequency-domain optimal control of quantum harmonic emission.
//!
//! The crate optimizes a band-limited driving field `eps(t)` so that the
//! dipole response of a small quantum system radiates in a chosen
//! high-frequency window. The control functional is posed on the frequency
//! axis: a cosine-transform pair connects time signals on a midpoint time
//! grid with spectra on the conjugate `omega = k*pi/T` grid, filter
//! functions shape the admissible field band and the target emission band,
//! and the field is iterated with a relaxation update driven by
//! adjoint (costate) propagation.
//!
//! Modules:
//! - [`quantum`]: states, operators, Hamiltonians, eigensolver, propagation
//! - [`spectral`]: cosine-transform pair, spectra, filter functions
//! - [`functional`]: objective terms, costate source and terminal condition
//! - [`optimizer`]: relaxation iteration with adaptive mixing
//! - [`problems`]: built-in benchmark systems
//!
//! All numerics are generic over the scalar type through the [`Real`]
//! trait; `f64` is the working precision (see the `*64` aliases below).
//! `f32` compiles but does not reach the documented tolerances.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

pub mod error;
pub mod functional;
pub mod optimizer;
pub mod problems;
pub mod quantum;
pub mod spectral;

pub use error::{Error, Result};

/// Scalar type for all numerics: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + rustdct::DctNum
    + nalgebra::RealField
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for embedding an `f64` literal into the generic scalar type.
#[inline]
pub fn scalar<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal must embed into the scalar type")
}

pub type Complex<R> = num_complex::Complex<R>;

pub type StateVector64 = quantum::StateVector<f64>;
pub type Operator64 = quantum::Operator<f64>;
pub type HamiltonianModel64 = quantum::HamiltonianModel<f64>;
pub type Trajectory64 = quantum::Trajectory<f64>;
pub type TimeSignal64 = spectral::TimeSignal<f64>;
pub type Spectrum64 = spectral::Spectrum<f64>;
pub type ProblemSpec64 = problems::ProblemSpec<f64>;
pub type OptimizationResult64 = optimizer::OptimizationResult<f64>;
