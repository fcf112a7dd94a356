//! Heisenberg-picture dynamics generated by non-self-adjoint Hamiltonians on
//! finite-dimensional Hilbert spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense complex kernels (matrix exponential, general
//!   eigendecomposition, SVD nullspace, Kronecker products).
//! * [`biortho`]: biorthogonal eigensystems and metric operators.
//! * [`gamma`]: the dynamics `X ↦ e^{iH†t} X e^{−iHt}`, its derivation,
//!   symmetry search and norm evolution.
//! * [`flow`]: the normalized (nonlinear) state flow and the
//!   classification of conserved quantities along it.
//! * [`eigenstate`]: the special case of an eigenvector as initial state.
//! * [`fermion`]: a three-mode fermionic model with a nilpotent Hamiltonian.
//! * [`scenario`]: JSON-configured batch runs with CSV and JSON output.

pub mod biortho;
pub mod eigenstate;
pub mod ensemble;
pub mod error;
pub mod fermion;
pub mod flow;
pub mod gamma;
pub mod linalg;
pub mod scenario;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, StateVector};

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;
