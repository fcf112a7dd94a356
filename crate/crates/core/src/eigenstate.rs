//! Normalized flow started from an eigenvector `φ` of `H` with eigenvalue
//! `E = E_r + iE_i` (not necessarily real).
//!
//! Along this trajectory `⟨Ψ̂, (H† − H)Ψ̂⟩ = −2iE_i` for all `t`, so `δ_Ψ̂`
//! collapses to the fixed map `X ↦ δ_γ(X) − 2E_i X`, and its exponential
//! series agrees with conjugation by the shifted propagators of
//! `H_E = H − E𝟙`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::exact_trajectory;
use crate::gamma::{exponential_series, GammaContext, SeriesSum, DEFAULT_TERM_CAP};
use crate::linalg::{
    eig_general, expm, op_norm, quadratic_form, ComplexMatrix, StateVector, DEFAULT_TOL_EIG,
};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };
const EIGEN_RESIDUAL_REL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenstateContext {
    gamma: GammaContext,
    index: usize,
    energy: C64,
    phi: StateVector,
    h_shifted: ComplexMatrix,
}

impl EigenstateContext {
    /// Uses the `index`-th eigenpair of `H`, eigenvalues sorted by real then
    /// imaginary part (0-based).
    pub fn new(h: &ComplexMatrix, index: usize) -> Result<Self> {
        let spectrum = eig_general(h, DEFAULT_TOL_EIG)?;
        if index >= spectrum.dim() {
            return Err(Error::InvalidArgument(format!(
                "eigen index {index} out of range for dimension {}",
                spectrum.dim()
            )));
        }
        Self::from_pair(
            h,
            index,
            spectrum.eigenvalues[index],
            spectrum.vector(index),
        )
    }

    /// Uses the eigenpair whose eigenvalue is nearest to `target`.
    pub fn for_eigenvalue(h: &ComplexMatrix, target: C64) -> Result<Self> {
        let spectrum = eig_general(h, DEFAULT_TOL_EIG)?;
        let index = spectrum
            .nearest(target)
            .ok_or_else(|| Error::InvalidArgument("empty Hamiltonian".into()))?;
        Self::from_pair(
            h,
            index,
            spectrum.eigenvalues[index],
            spectrum.vector(index),
        )
    }

    fn from_pair(h: &ComplexMatrix, index: usize, energy: C64, phi: StateVector) -> Result<Self> {
        let gamma = GammaContext::new(h.clone())?;
        let phi = &phi / C64::new(phi.norm(), 0.0);
        let residual = (h.apply(&phi) - &phi * energy).norm();
        let limit = EIGEN_RESIDUAL_REL * gamma.h_norm().max(f64::MIN_POSITIVE);
        if residual > limit {
            return Err(Error::NoConvergence {
                residual,
                detail: format!("eigenpair {index} residual exceeds {limit:e}"),
            });
        }
        let h_shifted = h - &ComplexMatrix::identity(h.rows()).scale(energy);
        Ok(Self {
            gamma,
            index,
            energy,
            phi,
            h_shifted,
        })
    }

    pub fn h(&self) -> &ComplexMatrix {
        self.gamma.h()
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn energy(&self) -> C64 {
        self.energy
    }

    pub fn e_r(&self) -> f64 {
        self.energy.re
    }

    pub fn e_i(&self) -> f64 {
        self.energy.im
    }

    pub fn phi(&self) -> &StateVector {
        &self.phi
    }

    /// `H − E𝟙`
    pub fn h_shifted(&self) -> &ComplexMatrix {
        &self.h_shifted
    }

    fn check(&self, x: &ComplexMatrix) -> Result<()> {
        let n = self.gamma.dim();
        if x.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "observable is {:?}, expected {n}x{n}",
                x.shape()
            )));
        }
        Ok(())
    }

    /// `δ_γ(X) − 2E_i X`
    pub fn special_delta(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(x)?;
        Ok(self.special_delta_unchecked(x))
    }

    fn special_delta_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let h = self.gamma.h();
        let dg = (&(self.gamma.h_adjoint() * x) - &(x * h)).scale(I);
        &dg - &x.scale_real(2.0 * self.energy.im)
    }

    /// Partial sum of `Σ t^k δ^k(X)/k!` for the fixed map [`Self::special_delta`].
    pub fn beta_series(&self, x: &ComplexMatrix, t: f64, tol_trunc: f64) -> Result<SeriesSum> {
        self.check(x)?;
        let rate = (2.0 * self.gamma.h_norm() + 2.0 * self.energy.im.abs()) * t.abs();
        exponential_series(x, t, rate, tol_trunc, DEFAULT_TERM_CAP, |y| {
            self.special_delta_unchecked(y)
        })
    }

    /// `e^{iH_E† t} X e^{−iH_E t}`
    pub fn gamma_hat(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        self.check(x)?;
        let left = expm(&self.h_shifted.adjoint().scale(C64::new(0.0, t)))?;
        let right = expm(&self.h_shifted.scale(C64::new(0.0, -t)))?;
        Ok(&(&left * x) * &right)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakIdentityReport {
    pub index: usize,
    pub energy: C64,
    /// `sup_t |⟨φ, γ̂^t(𝟙) φ⟩ − 1|`
    pub identity_mean_residual: f64,
    /// `sup_t |⟨φ, δ(𝟙) φ⟩|`
    pub identity_derivative_residual: f64,
    /// `sup_t ‖γ̂^t(𝟙) − 𝟙‖`, nonzero when `γ̂^t` does not fix `𝟙` strongly.
    pub identity_strong_deviation: f64,
    /// `sup_t |⟨φ, γ̂^t(XY) φ⟩ − ⟨φ, γ̂^t(X) γ̂^t(Y) φ⟩|`
    pub automorphism_witness: f64,
    /// `sup_t |⟨φ, δ(X) φ⟩|` for the supplied `X`.
    pub observable_derivative: f64,
    /// `sup_t ‖Ψ̂(t) − e^{−iE_r t} φ‖`
    pub trajectory_residual: f64,
}

/// Evaluates the weak identities on `t_grid`, with `(x, y)` as the pair used
/// for the automorphism witness.
pub fn weak_identity_report(
    ctx: &EigenstateContext,
    t_grid: &[f64],
    x: &ComplexMatrix,
    y: &ComplexMatrix,
) -> Result<WeakIdentityReport> {
    ctx.check(x)?;
    ctx.check(y)?;
    let n = ctx.gamma.dim();
    let id = ComplexMatrix::identity(n);
    let phi = ctx.phi();
    let xy = x * y;

    let identity_derivative_residual = quadratic_form(&ctx.special_delta(&id)?, phi).norm();
    let observable_derivative = quadratic_form(&ctx.special_delta(x)?, phi).norm();
    let mut mean_res = 0.0f64;
    let mut strong = 0.0f64;
    let mut witness = 0.0f64;
    for &t in t_grid {
        let g_id = ctx.gamma_hat(&id, t)?;
        mean_res = mean_res.max((quadratic_form(&g_id, phi) - C64::new(1.0, 0.0)).norm());
        strong = strong.max(op_norm(&(&g_id - &id))?);
        let lhs = quadratic_form(&ctx.gamma_hat(&xy, t)?, phi);
        let rhs = quadratic_form(&(&ctx.gamma_hat(x, t)? * &ctx.gamma_hat(y, t)?), phi);
        witness = witness.max((lhs - rhs).norm());
    }

    let traj = exact_trajectory(ctx.h(), phi, t_grid)?;
    let trajectory_residual = traj
        .t_grid
        .iter()
        .zip(&traj.psi_hat)
        .map(|(&t, v)| (v - phi * C64::from_polar(1.0, -ctx.e_r() * t)).norm())
        .fold(0.0, f64::max);

    Ok(WeakIdentityReport {
        index: ctx.index,
        energy: ctx.energy,
        identity_mean_residual: mean_res,
        identity_derivative_residual,
        identity_strong_deviation: strong,
        automorphism_witness: witness,
        observable_derivative,
        trajectory_residual,
    })
}
