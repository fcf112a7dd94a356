//! Seeded random matrices and Hamiltonian ensembles.
//!
//! Non-Hermitian generators are built as `V · diag(spectrum) · V⁻¹` with a
//! controlled condition number for `V`, which gives direct access to the
//! Hermitian, real-spectrum and complex-spectrum regimes.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{inverse, ComplexMatrix, StateVector};
use crate::C64;

pub type EnsembleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> EnsembleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// `H = H†`
    Hermitian,
    /// Non-Hermitian, diagonalizable, real eigenvalues.
    RealNonHermitian,
    /// Non-Hermitian with at least one eigenvalue off the real axis.
    Complex,
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Entries uniform in the unit square of the complex plane.
pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let m = DMatrix::from_fn(rows, cols, |_, _| random_complex(rng));
    ComplexMatrix::from_dmatrix_unchecked(m)
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n, n);
    (&a + &a.adjoint()).scale_real(0.5)
}

/// Unit vector with random complex amplitudes.
pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    let v = StateVector::from_fn(n, |_, _| random_complex(rng));
    let nrm = v.norm();
    v / C64::new(nrm, 0.0)
}

pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n, n).into_dmatrix();
    let qr = a.qr();
    let (q, r) = qr.unpack();
    // Fix column phases so the distribution does not depend on QR sign choices.
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    ComplexMatrix::from_dmatrix_unchecked(q)
}

/// `U · diag(σ) · W` with singular values spread log-uniformly in `[1, cond]`.
pub fn random_conditioned<R: Rng>(rng: &mut R, n: usize, cond: f64) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let w = random_unitary(rng, n);
    let sigmas: Vec<f64> = (0..n)
        .map(|k| {
            if n == 1 {
                1.0
            } else {
                cond.powf(k as f64 / (n - 1) as f64)
            }
        })
        .collect();
    &(&u * &ComplexMatrix::from_real_diagonal(&sigmas)) * &w
}

/// Real eigenvalues with pairwise gaps of at least `min_gap`, drawn from
/// `[-n, n]`.
pub fn spread_real_spectrum<R: Rng>(rng: &mut R, n: usize, min_gap: f64) -> Vec<f64> {
    let span = n as f64;
    loop {
        let mut ev: Vec<f64> = (0..n).map(|_| rng.random_range(-span..span)).collect();
        ev.sort_by(f64::total_cmp);
        if ev.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return ev;
        }
    }
}

/// A Hamiltonian from the requested regime, together with its eigenvector
/// matrix (identity-like unitary for the Hermitian case).
pub struct GeneratedHamiltonian {
    pub h: ComplexMatrix,
    pub eigenvectors: ComplexMatrix,
    pub eigenvalues: Vec<C64>,
}

pub fn random_hamiltonian<R: Rng>(
    rng: &mut R,
    n: usize,
    kind: SpectrumKind,
    cond: f64,
) -> Result<GeneratedHamiltonian> {
    let real = spread_real_spectrum(rng, n, 0.2);
    let mut eigenvalues: Vec<C64> = real.iter().map(|&x| C64::new(x, 0.0)).collect();
    let v = match kind {
        SpectrumKind::Hermitian => random_unitary(rng, n),
        _ => random_conditioned(rng, n, cond),
    };
    if kind == SpectrumKind::Complex {
        for (k, e) in eigenvalues.iter_mut().enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            e.im = sign * rng.random_range(0.1..0.6);
        }
    }
    let d = ComplexMatrix::from_diagonal(&eigenvalues);
    let h = match kind {
        SpectrumKind::Hermitian => {
            let h = &(&v * &d) * &v.adjoint();
            (&h + &h.adjoint()).scale_real(0.5)
        }
        _ => &(&v * &d) * &inverse(&v)?,
    };
    Ok(GeneratedHamiltonian {
        h,
        eigenvectors: v,
        eigenvalues,
    })
}
