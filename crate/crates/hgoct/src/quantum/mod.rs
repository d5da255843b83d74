//! Finite-dimensional quantum mechanics: states, Hermitian operators in
//! level and periodic-grid representations, eigensolver, and forward /
//! backward (inhomogeneous) Schrödinger propagation.

pub mod eigen;
pub mod grid;
pub mod hamiltonian;
pub mod operator;
pub mod propagate;
pub mod state;

pub use eigen::eigensolve;
pub use grid::{SpatialGrid, TimeGrid};
pub use hamiltonian::HamiltonianModel;
pub use operator::Operator;
pub use propagate::{
    propagate_backward_inhomogeneous, propagate_forward, ControlField, SourceTerm, Trajectory,
    ZeroSource,
};
pub use state::{BasisKind, StateVector};
