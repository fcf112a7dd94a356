//! Dense complex linear-algebra kernels shared by every other module.

mod decomp;
mod expm;
mod matrix;

pub use decomp::{
    condition_number, eig_general, hermitian_part_eigenvalues, inverse, nullspace, numerical_rank,
    op_norm, singular_values, spectral_norm, Spectrum, DEFAULT_RANK_TOL_REL, DEFAULT_TOL_EIG,
};
pub use expm::{expm, propagator};
pub use matrix::{
    basis_vector, inner, kron, kron_with_limit, quadratic_form, state_from_pairs, state_to_pairs,
    ComplexMatrix, StateVector, DEFAULT_MAX_KRON_ENTRIES,
};
