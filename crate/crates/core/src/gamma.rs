//! The γ-dynamics `γ^t(X) = e^{iH†t} X e^{−iHt}` and the objects built on it:
//! the derivation `δ_γ(X) = i(H†X − XH)`, its exponential series, the norm of
//! an evolved state, γ-symmetries (`H†X = XH`) and the norm-preserving
//! similarity construction `H = R H₀ R⁻¹`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, expm, inverse, kron, nullspace, numerical_rank, op_norm, propagator,
    ComplexMatrix, StateVector,
};
use crate::C64;

pub const DEFAULT_TOL_TRUNC: f64 = 1e-12;
pub const DEFAULT_TERM_CAP: usize = 500;
/// Relative bound used to certify a generator: `‖H†X − XH‖_F ≤ 1e-9 ‖H‖ ‖X‖_F`.
pub const SYMMETRY_CERT_REL: f64 = 1e-9;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A Hamiltonian with its cached operator norm.
#[derive(Clone, Debug)]
pub struct GammaContext {
    h: ComplexMatrix,
    h_adj: ComplexMatrix,
    h_norm: f64,
}

impl GammaContext {
    pub fn new(h: ComplexMatrix) -> Result<Self> {
        h.require_square("GammaContext")?;
        let h_norm = op_norm(&h)?;
        let h_adj = h.adjoint();
        Ok(Self { h, h_adj, h_norm })
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn h_adjoint(&self) -> &ComplexMatrix {
        &self.h_adj
    }

    pub fn h_norm(&self) -> f64 {
        self.h_norm
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.h.is_hermitian(tol)
    }

    fn check_operand(&self, x: &ComplexMatrix) -> Result<()> {
        if x.shape() != (self.dim(), self.dim()) {
            return Err(Error::Dimension(format!(
                "operand is {:?}, Hamiltonian is {n}x{n}",
                x.shape(),
                n = self.dim()
            )));
        }
        Ok(())
    }

    fn check_state(&self, v: &StateVector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "state has length {}, Hamiltonian is {n}x{n}",
                v.len(),
                n = self.dim()
            )));
        }
        Ok(())
    }

    /// `e^{−iHt}`
    pub fn propagator(&self, t: f64) -> Result<ComplexMatrix> {
        propagator(&self.h, t)
    }

    /// `e^{iH†t}`
    pub fn adjoint_propagator(&self, t: f64) -> Result<ComplexMatrix> {
        expm(&self.h_adj.scale(C64::new(0.0, t)))
    }

    /// `γ^t(X) = e^{iH†t} X e^{−iHt}`
    pub fn gamma_t(&self, x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
        self.check_operand(x)?;
        Ok(&(&self.adjoint_propagator(t)? * x) * &self.propagator(t)?)
    }

    /// `δ_γ(X) = i(H†X − XH)`
    pub fn delta_gamma(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_operand(x)?;
        Ok(self.delta_unchecked(x))
    }

    fn delta_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        (&(&self.h_adj * x) - &(x * &self.h)).scale(I)
    }

    /// Partial sum `Σ_{k≤K} t^k δ_γ^k(X)/k!` with `K` fixed a priori from the
    /// growth bound `‖δ_γ^k(X)‖ ≤ (2‖H‖)^k ‖X‖`.
    pub fn gamma_series(&self, x: &ComplexMatrix, t: f64, tol_trunc: f64) -> Result<SeriesSum> {
        self.gamma_series_capped(x, t, tol_trunc, DEFAULT_TERM_CAP)
    }

    pub fn gamma_series_capped(
        &self,
        x: &ComplexMatrix,
        t: f64,
        tol_trunc: f64,
        cap: usize,
    ) -> Result<SeriesSum> {
        self.check_operand(x)?;
        let rate = 2.0 * self.h_norm * t.abs();
        exponential_series(x, t, rate, tol_trunc, cap, |y| self.delta_unchecked(y))
    }

    /// `I(t) = ‖e^{−iHt} ψ₀‖²` on a grid, with the analytic derivative
    /// `i⟨Ψ, (H† − H)Ψ⟩` and its mismatch against a central difference.
    pub fn identity_norm_evolution(
        &self,
        psi0: &StateVector,
        t_grid: &[f64],
    ) -> Result<Vec<NormSample>> {
        self.check_state(psi0)?;
        if t_grid.is_empty() {
            return Err(Error::InvalidArgument("time grid is empty".into()));
        }
        if psi0.norm() == 0.0 {
            return Err(Error::InvalidArgument("initial state is zero".into()));
        }
        let step = fd_step(t_grid);
        let anti = &self.h_adj - &self.h;
        let norm_at =
            |t: f64| -> Result<f64> { Ok(self.propagator(t)?.apply(psi0).norm_squared()) };

        t_grid
            .iter()
            .map(|&t| {
                let psi = self.propagator(t)?.apply(psi0);
                let norm_sq = psi.norm_squared();
                let derivative = (I * psi.dotc(&anti.apply(&psi))).re;
                let fd = (norm_at(t + step)? - norm_at(t - step)?) / (2.0 * step);
                Ok(NormSample {
                    t,
                    norm_sq,
                    derivative,
                    fd_residual: (fd - derivative).abs(),
                })
            })
            .collect()
    }

    /// Basis of `{X : H†X = XH}` from the kernel of `𝟙 ⊗ H† − Hᵀ ⊗ 𝟙`.
    pub fn gamma_symmetry_basis(&self, rank_tol_rel: f64) -> Result<SymmetryBasis> {
        let n = self.dim();
        let id = ComplexMatrix::identity(n);
        // vec(H†X) = (𝟙 ⊗ H†) vec X and vec(XH) = (Hᵀ ⊗ 𝟙) vec X.
        let l = &kron(&id, &self.h_adj)? - &kron(&self.h.transpose(), &id)?;
        let kernel = nullspace(&l, rank_tol_rel)?;

        let generators: Vec<ComplexMatrix> = kernel
            .column_vectors()
            .iter()
            .map(|v| ComplexMatrix::unvec(v, n, n))
            .collect::<Result<_>>()?;
        let residuals = generators
            .iter()
            .map(|x| self.intertwining_residual(x))
            .collect();
        let chain_closure_dim = match generators.first() {
            Some(x) => self.chain_closure_dim(x, rank_tol_rel)?,
            None => 0,
        };
        Ok(SymmetryBasis {
            generators,
            residuals,
            chain_closure_dim,
        })
    }

    /// `‖H†X − XH‖_F`
    pub fn intertwining_residual(&self, x: &ComplexMatrix) -> f64 {
        (&(&self.h_adj * x) - &(x * &self.h)).frobenius_norm()
    }

    /// Whether `X` passes `‖H†X − XH‖_F ≤ 1e-9 · ‖H‖ · ‖X‖_F`.
    pub fn certifies_symmetry(&self, x: &ComplexMatrix) -> bool {
        self.intertwining_residual(x) <= self.symmetry_bound(x)
    }

    pub fn symmetry_bound(&self, x: &ComplexMatrix) -> f64 {
        SYMMETRY_CERT_REL * self.h_norm.max(f64::MIN_POSITIVE) * x.frobenius_norm()
    }

    /// `X, XH, XH², …, XH^{N−1}`. Higher powers are linear combinations of
    /// these by Cayley-Hamilton.
    pub fn chain(&self, x: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
        self.check_operand(x)?;
        let mut out = Vec::with_capacity(self.dim());
        let mut cur = x.clone();
        for _ in 0..self.dim() {
            let next = &cur * &self.h;
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// Dimension of `span{X H^k : k = 0..N−1}`.
    pub fn chain_closure_dim(&self, x: &ComplexMatrix, rank_tol_rel: f64) -> Result<usize> {
        let members = self.chain(x)?;
        let cols: Vec<StateVector> = members.iter().map(ComplexMatrix::vec).collect();
        Ok(numerical_rank(
            &ComplexMatrix::from_columns(&cols)?,
            rank_tol_rel,
        ))
    }

    /// `sup_t ‖e^{iH†t} e^{−iHt} − 𝟙‖` over the grid.
    pub fn norm_preservation_defect(&self, t_grid: &[f64]) -> Result<f64> {
        let id = ComplexMatrix::identity(self.dim());
        let mut worst = 0.0f64;
        for &t in t_grid {
            let g = &self.adjoint_propagator(t)? * &self.propagator(t)?;
            worst = worst.max(op_norm(&(&g - &id))?);
        }
        Ok(worst)
    }
}

/// Truncated exponential series of a linear map, with a certified tail.
#[derive(Clone, Debug)]
pub struct SeriesSum {
    pub value: ComplexMatrix,
    pub terms_used: usize,
    /// A-priori bound on the omitted tail.
    pub tail_bound: f64,
}

/// Smallest `K` with `norm · Σ_{k>K} rate^k/k! < tol`, together with that bound.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
pub(crate) fn truncation_order(norm: f64, rate: f64, tol: f64, cap: usize) -> Result<(usize, f64)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "truncation tolerance must be positive, got {tol}"
        )));
    }
    if norm == 0.0 || rate == 0.0 {
        return Ok((0, 0.0));
    }
    // term = rate^{K+1}/(K+1)!; once K+2 > rate the tail is dominated by a
    // geometric series with ratio rate/(K+2).
    let mut term = rate;
    let mut last_bound = f64::INFINITY;
    for k in 0..cap {
        let ratio = rate / (k + 2) as f64;
        if ratio < 1.0 && term.is_finite() {
            let bound = norm * term / (1.0 - ratio);
            last_bound = bound;
            if bound < tol {
                return Ok((k, bound));
            }
        }
        term *= rate / (k + 2) as f64;
    }
    Err(Error::Truncation {
        cap,
        tail_bound: last_bound,
        tol,
    })
}

pub(crate) fn exponential_series<F>(
    x: &ComplexMatrix,
    t: f64,
    rate: f64,
    tol: f64,
    cap: usize,
    derivation: F,
) -> Result<SeriesSum>
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let x_norm = op_norm(x)?;
    let (order, tail_bound) = truncation_order(x_norm, rate, tol, cap)?;
    let mut sum = x.clone();
    let mut term = x.clone();
    for k in 1..=order {
        term = derivation(&term).scale_real(t / k as f64);
        sum = &sum + &term;
    }
    Ok(SeriesSum {
        value: sum,
        terms_used: order + 1,
        tail_bound,
    })
}

fn fd_step(t_grid: &[f64]) -> f64 {
    let min_gap = t_grid
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if min_gap.is_finite() {
        (min_gap * 1e-2).max(1e-5)
    } else {
        1e-4
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NormSample {
    pub t: f64,
    /// `‖Ψ(t)‖²`
    pub norm_sq: f64,
    /// `i⟨Ψ(t), (H† − H)Ψ(t)⟩`
    pub derivative: f64,
    /// `|central difference − derivative|`
    pub fd_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryBasis {
    /// Frobenius-orthonormal solutions of `H†X = XH`.
    pub generators: Vec<ComplexMatrix>,
    /// `‖H†X − XH‖_F` per generator.
    pub residuals: Vec<f64>,
    /// Rank of the chain `X H^k`, `k < N`, built from the first generator.
    pub chain_closure_dim: usize,
}

impl SymmetryBasis {
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// `H = R H₀ R⁻¹` plus the obstruction `‖[H₀, R†R]‖`.
#[derive(Clone, Debug, Serialize)]
pub struct SimilarityConstruction {
    pub h: ComplexMatrix,
    /// Operator norm of `H₀ R†R − R†R H₀`.
    pub commutator_residual: f64,
    pub r_condition: f64,
}

pub fn similar_norm_preserving(
    h0: &ComplexMatrix,
    r: &ComplexMatrix,
) -> Result<SimilarityConstruction> {
    h0.require_square("similar_norm_preserving")?;
    h0.require_same_shape(r, "similar_norm_preserving")?;
    let defect = h0.hermiticity_defect();
    if defect > 1e-12 * h0.frobenius_norm().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "H0 must be Hermitian (‖H0 − H0†‖_F = {defect:e})"
        )));
    }
    let r_condition = condition_number(r);
    let r_inv = inverse(r)?;
    let h = &(r * h0) * &r_inv;
    let metric = &r.adjoint() * r;
    let commutator = &(h0 * &metric) - &(&metric * h0);
    Ok(SimilarityConstruction {
        h,
        commutator_residual: op_norm(&commutator)?,
        r_condition,
    })
}
