//! Eigen and singular-value routines built on nalgebra's Schur and SVD.

use nalgebra::linalg::{Schur, SymmetricEigen, SVD};
use nalgebra::DMatrix;
use serde::Serialize;

use super::{ComplexMatrix, StateVector};
use crate::error::{Error, Result};
use crate::C64;

pub const DEFAULT_TOL_EIG: f64 = 1e-10;
pub const DEFAULT_RANK_TOL_REL: f64 = 1e-10;

const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenpairs of a general square matrix.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors as columns, in eigenvalue order.
    pub right_vectors: ComplexMatrix,
    /// 2-norm condition number of `right_vectors`; saturates near `1/ε`
    /// for (numerically) defective input.
    pub condition_estimate: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> StateVector {
        self.right_vectors.column(k)
    }

    /// Index of the eigenvalue nearest to `target`.
    pub fn nearest(&self, target: C64) -> Option<usize> {
        self.eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
            .map(|(k, _)| k)
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = SVD::new(a.as_dmatrix().clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Induced 2-norm.
pub fn op_norm(a: &ComplexMatrix) -> Result<f64> {
    a.require_square("op_norm")?;
    Ok(singular_values(a).first().copied().unwrap_or(0.0))
}

/// Induced 2-norm of a rectangular matrix.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// `σ_max / σ_min`, capped at `1/ε` so the value stays finite.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let s = singular_values(a);
    let (Some(&max), Some(&min)) = (s.first(), s.last()) else {
        return 1.0;
    };
    if max == 0.0 {
        return 1.0 / f64::EPSILON;
    }
    (max / min.max(max * f64::EPSILON)).min(1.0 / f64::EPSILON)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.require_square("inverse")?;
    let cond = condition_number(a);
    if cond >= 1.0 / f64::EPSILON {
        return Err(Error::Singular { condition: cond });
    }
    let inv = a
        .as_dmatrix()
        .clone()
        .try_inverse()
        .ok_or(Error::Singular { condition: cond })?;
    ComplexMatrix::try_from_dmatrix(inv)
}

/// Eigenvalues of the Hermitian part `(A + A†)/2`, ascending.
pub fn hermitian_part_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    a.require_square("hermitian_part_eigenvalues")?;
    let herm = (a.as_dmatrix() + a.as_dmatrix().adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Orthonormal basis of the numerical kernel of `l`.
///
/// Columns are the right singular vectors whose singular values fall below
/// `rank_tol_rel · σ_max`. A zero matrix has the whole space as kernel.
pub fn nullspace(l: &ComplexMatrix, rank_tol_rel: f64) -> Result<ComplexMatrix> {
    if !(rank_tol_rel > 0.0 && rank_tol_rel < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "rank_tol_rel must lie in (0, 1), got {rank_tol_rel}"
        )));
    }
    let (m, n) = l.shape();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    // Pad with zero rows so the SVD returns a full n x n right factor.
    let padded = if m < n {
        let mut p = DMatrix::<C64>::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(l.as_dmatrix());
        p
    } else {
        l.as_dmatrix().clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericRange("SVD did not produce right singular vectors".into()))?;
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cut = rank_tol_rel * sigma_max;

    let cols: Vec<StateVector> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| sigma_max == 0.0 || s < cut)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect();
    if cols.is_empty() {
        return Ok(ComplexMatrix::zeros(n, 0));
    }
    ComplexMatrix::from_columns(&cols)
}

/// Numerical rank under the same relative cut as [`nullspace`].
pub fn numerical_rank(a: &ComplexMatrix, rank_tol_rel: f64) -> usize {
    let s = singular_values(a);
    let Some(&max) = s.first() else { return 0 };
    if max == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x >= rank_tol_rel * max).count()
}

/// Eigenvectors of an upper-triangular `t` by back-substitution.
///
/// Near-equal diagonal entries get the divisor clamped to `smin`, which keeps
/// defective blocks finite (their vectors come out nearly parallel, and the
/// condition estimate reports it).
fn triangular_eigenvectors(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
    let mut y = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        y[(k, k)] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                acc += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < smin {
                d = C64::new(smin, 0.0);
            }
            y[(i, k)] = -acc / d;
            // Rescale the column if it grows without bound.
            let big = y.column(k).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big > 1e150 {
                let s = C64::new(1.0 / big, 0.0);
                for r in i..=k {
                    y[(r, k)] *= s;
                }
            }
        }
    }
    y
}

/// Full eigendecomposition of a general complex matrix.
///
/// Fails with [`Error::NoConvergence`] when the Schur iteration stalls or when
/// an eigenpair misses `‖A v − λ v‖ ≤ tol_eig · ‖A‖ · ‖v‖`.
pub fn eig_general(a: &ComplexMatrix, tol_eig: f64) -> Result<Spectrum> {
    a.require_square("eig_general")?;
    let n = a.rows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            right_vectors: ComplexMatrix::zeros(0, 0),
            condition_estimate: 1.0,
        });
    }
    let schur =
        Schur::try_new(a.as_dmatrix().clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or_else(|| {
            Error::NoConvergence {
                residual: f64::NAN,
                detail: format!("Schur iteration exceeded {SCHUR_MAX_ITER} sweeps"),
            }
        })?;
    let (q, t) = schur.unpack();
    let y = triangular_eigenvectors(&t);
    let v = &q * y;

    let mut pairs: Vec<(C64, StateVector)> = (0..n)
        .map(|k| {
            let col = v.column(k).into_owned();
            let nrm = col.norm();
            (t[(k, k)], col / C64::new(nrm, 0.0))
        })
        .collect();
    pairs.sort_by(|x, y| x.0.re.total_cmp(&y.0.re).then(x.0.im.total_cmp(&y.0.im)));

    let a_norm = op_norm(a)?;
    let mut worst = 0.0f64;
    for (lambda, vec) in &pairs {
        let r = (a.apply(vec) - vec * *lambda).norm();
        worst = worst.max(r);
        if r > tol_eig * a_norm {
            return Err(Error::NoConvergence {
                residual: r,
                detail: format!(
                    "eigenpair {lambda} exceeds tolerance {:e}",
                    tol_eig * a_norm
                ),
            });
        }
    }

    let vectors: Vec<StateVector> = pairs.iter().map(|(_, v)| v.clone()).collect();
    let right_vectors = ComplexMatrix::from_columns(&vectors)?;
    let condition_estimate = condition_number(&right_vectors);
    Ok(Spectrum {
        eigenvalues: pairs.into_iter().map(|(l, _)| l).collect(),
        right_vectors,
        condition_estimate,
    })
}
