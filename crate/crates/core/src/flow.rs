//! Normalized state flow `Ψ̂(t) = Ψ(t)/‖Ψ(t)‖` and the conserved-quantity
//! classes it induces.
//!
//! `Ψ̂` obeys `i dΨ̂/dt = H_nl(t) Ψ̂` with
//! `H_nl = H + ½⟨Ψ̂, (H† − H)Ψ̂⟩ 𝟙`, and observables evolve through the
//! state-dependent derivation `δ_Ψ̂(X) = δ_γ(X) − iX⟨Ψ̂, (H† − H)Ψ̂⟩`.
//! Everything here takes the state explicitly; time only enters through it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{exponential_series, GammaContext, SeriesSum};
use crate::linalg::{op_norm, propagator, quadratic_form, ComplexMatrix, StateVector};
use crate::C64;

pub const DEFAULT_TOL_CLASS: f64 = 1e-8;
pub const DEFAULT_GRID_POINTS: usize = 201;
/// Unit-norm tolerance for initial states.
pub const INITIAL_NORM_TOL: f64 = 1e-12;
/// Unit-norm tolerance for pointwise operations on `Ψ̂`.
pub const UNIT_TOL: f64 = 1e-10;
/// Deviation beyond which the nonlinear integrator reports instability.
pub const INSTABILITY_LIMIT: f64 = 0.1;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn require_unit(v: &StateVector, tol: f64) -> Result<()> {
    let norm = v.norm();
    if (norm - 1.0).abs() > tol {
        return Err(Error::NotNormalized { norm, tol });
    }
    Ok(())
}

fn require_dims(h: &ComplexMatrix, x: Option<&ComplexMatrix>, v: &StateVector) -> Result<()> {
    h.require_square("flow")?;
    let n = h.rows();
    if v.len() != n || x.is_some_and(|x| x.shape() != (n, n)) {
        return Err(Error::Dimension(format!(
            "Hamiltonian is {n}x{n}, state has length {}, observable is {:?}",
            v.len(),
            x.map(ComplexMatrix::shape)
        )));
    }
    Ok(())
}

/// Samples of `Ψ(t)`, `Ψ̂(t)` and `‖Ψ(t)‖²` on a time grid.
#[derive(Clone, Debug)]
pub struct StateTrajectory {
    pub t_grid: Vec<f64>,
    pub psi: Vec<StateVector>,
    pub psi_hat: Vec<StateVector>,
    pub norm_sq: Vec<f64>,
}

impl StateTrajectory {
    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    fn from_unnormalized(t_grid: Vec<f64>, psi: Vec<StateVector>) -> Self {
        let norm_sq: Vec<f64> = psi.iter().map(StateVector::norm_squared).collect();
        let psi_hat = psi
            .iter()
            .zip(&norm_sq)
            .map(|(v, n)| v / C64::new(n.sqrt(), 0.0))
            .collect();
        Self {
            t_grid,
            psi,
            psi_hat,
            norm_sq,
        }
    }

    /// `⟨Ψ̂(t_j), X Ψ̂(t_j)⟩` along the grid.
    pub fn mean_values(&self, x: &ComplexMatrix) -> Vec<C64> {
        self.psi_hat.iter().map(|v| quadratic_form(x, v)).collect()
    }
}

/// `Ψ(t_j) = e^{−iH t_j} ψ₀` for a unit `ψ₀`.
pub fn exact_trajectory(
    h: &ComplexMatrix,
    psi0: &StateVector,
    t_grid: &[f64],
) -> Result<StateTrajectory> {
    require_dims(h, None, psi0)?;
    require_unit(psi0, INITIAL_NORM_TOL)?;
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    let psi = t_grid
        .iter()
        .map(|&t| Ok(propagator(h, t)?.apply(psi0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(StateTrajectory::from_unnormalized(t_grid.to_vec(), psi))
}

/// `⟨v, (H† − H) v⟩ / ‖v‖²`, purely imaginary.
pub fn scalar_term(h: &ComplexMatrix, v: &StateVector) -> C64 {
    let z = quadratic_form(h, v) / C64::new(v.norm_squared(), 0.0);
    z.conj() - z
}

/// `H_nl = H + ½⟨Ψ̂, (H† − H)Ψ̂⟩ 𝟙`
pub fn h_nl(h: &ComplexMatrix, psi_hat: &StateVector) -> Result<ComplexMatrix> {
    require_dims(h, None, psi_hat)?;
    require_unit(psi_hat, UNIT_TOL)?;
    let shift = scalar_term(h, psi_hat) * 0.5;
    Ok(h + &ComplexMatrix::identity(h.rows()).scale(shift))
}

/// `δ_Ψ̂(X) = δ_γ(X) − iX⟨Ψ̂, (H† − H)Ψ̂⟩`
pub fn delta_psi_hat(
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    psi_hat: &StateVector,
) -> Result<ComplexMatrix> {
    require_dims(h, Some(x), psi_hat)?;
    require_unit(psi_hat, UNIT_TOL)?;
    Ok(delta_psi_hat_unchecked(h, x, scalar_term(h, psi_hat)))
}

fn delta_psi_hat_unchecked(h: &ComplexMatrix, x: &ComplexMatrix, scalar: C64) -> ComplexMatrix {
    let dg = (&(&h.adjoint() * x) - &(x * h)).scale(I);
    &dg - &x.scale(I * scalar)
}

/// The same derivation written as `i(H_nl† X − X H_nl)`.
pub fn delta_psi_hat_via_h_nl(
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    psi_hat: &StateVector,
) -> Result<ComplexMatrix> {
    let hn = h_nl(h, psi_hat)?;
    Ok((&(&hn.adjoint() * x) - &(x * &hn)).scale(I))
}

/// `x_Ψ̂ = ⟨Ψ̂, X Ψ̂⟩`
pub fn mean_value(x: &ComplexMatrix, psi_hat: &StateVector) -> Result<C64> {
    if x.shape() != (psi_hat.len(), psi_hat.len()) {
        return Err(Error::Dimension(format!(
            "observable is {:?}, state has length {}",
            x.shape(),
            psi_hat.len()
        )));
    }
    Ok(quadratic_form(x, psi_hat))
}

/// `d x_Ψ̂/dt = ⟨Ψ̂, δ_Ψ̂(X) Ψ̂⟩`
pub fn mean_derivative(h: &ComplexMatrix, x: &ComplexMatrix, psi_hat: &StateVector) -> Result<C64> {
    let d = delta_psi_hat(h, x, psi_hat)?;
    Ok(quadratic_form(&d, psi_hat))
}

/// Partial sums of `Σ t^k δ_Ψ̂^k(X)/k!` with `δ_Ψ̂` frozen at `psi_hat`.
///
/// Only convergence is certified (tail bound from `‖δ_Ψ̂(A)‖ ≤ 4‖H‖‖A‖`); no
/// claim is made about what the sum represents.
pub fn frozen_series(
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    psi_hat: &StateVector,
    t: f64,
    tol_trunc: f64,
) -> Result<SeriesSum> {
    require_dims(h, Some(x), psi_hat)?;
    require_unit(psi_hat, UNIT_TOL)?;
    let scalar = scalar_term(h, psi_hat);
    let rate = 4.0 * op_norm(h)? * t.abs();
    exponential_series(x, t, rate, tol_trunc, crate::gamma::DEFAULT_TERM_CAP, |y| {
        delta_psi_hat_unchecked(h, y, scalar)
    })
}

/// Output of [`integrate_nonlinear`].
#[derive(Clone, Debug)]
pub struct NonlinearRun {
    pub trajectory: StateTrajectory,
    /// `sup_j ‖Ψ̂_numeric(t_j) − Ψ̂_exact(t_j)‖`
    pub max_deviation: f64,
    /// `sup_j |‖Ψ̂_numeric(t_j)‖ − 1|`, monitored only.
    pub max_norm_drift: f64,
    pub step: f64,
}

fn nonlinear_rhs(h: &ComplexMatrix, v: &StateVector) -> StateVector {
    // The scalar is evaluated on v/‖v‖; v itself is never rescaled.
    let shift = scalar_term(h, v) * 0.5;
    (h.apply(v) + v * shift) * (-I)
}

/// Classical RK4 integration of `i dΨ̂/dt = H_nl(t) Ψ̂` on a uniform grid,
/// with `substeps` steps per grid interval.
///
/// The returned trajectory stores the integrated vector in both `psi` and
/// `psi_hat`; `norm_sq` holds `‖Ψ(t)‖²` from the exact linear propagator so
/// the record remains comparable with [`exact_trajectory`].
pub fn integrate_nonlinear(
    h: &ComplexMatrix,
    psi_hat0: &StateVector,
    t_grid: &[f64],
    substeps: usize,
) -> Result<NonlinearRun> {
    require_dims(h, None, psi_hat0)?;
    require_unit(psi_hat0, INITIAL_NORM_TOL)?;
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be at least 1".into()));
    }
    if t_grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "integration needs at least two grid points".into(),
        ));
    }
    let spacing = t_grid[1] - t_grid[0];
    let uniform = t_grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing.abs().max(1.0));
    if !uniform || spacing <= 0.0 {
        return Err(Error::InvalidArgument(
            "time grid must be uniform and increasing".into(),
        ));
    }
    let dt = spacing / substeps as f64;
    let exact = exact_trajectory(h, psi_hat0, t_grid)?;

    let mut states = Vec::with_capacity(t_grid.len());
    let mut v = psi_hat0.clone();
    states.push(v.clone());
    let half = C64::new(dt / 2.0, 0.0);
    let full = C64::new(dt, 0.0);
    let sixth = C64::new(dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    for _ in 1..t_grid.len() {
        for _ in 0..substeps {
            let k1 = nonlinear_rhs(h, &v);
            let k2 = nonlinear_rhs(h, &(&v + &k1 * half));
            let k3 = nonlinear_rhs(h, &(&v + &k2 * half));
            let k4 = nonlinear_rhs(h, &(&v + &k3 * full));
            v += (k1 + k2 * two + k3 * two + k4) * sixth;
        }
        states.push(v.clone());
    }

    let mut max_deviation = 0.0f64;
    let mut max_norm_drift = 0.0f64;
    for (num, ex) in states.iter().zip(&exact.psi_hat) {
        let dev = (num - ex).norm();
        if !dev.is_finite() {
            max_deviation = f64::INFINITY;
        }
        max_deviation = max_deviation.max(dev);
        max_norm_drift = max_norm_drift.max((num.norm() - 1.0).abs());
    }
    if max_deviation > INSTABILITY_LIMIT || !max_deviation.is_finite() {
        return Err(Error::Unstable {
            deviation: max_deviation,
            limit: INSTABILITY_LIMIT,
            substeps,
        });
    }
    Ok(NonlinearRun {
        trajectory: StateTrajectory {
            t_grid: t_grid.to_vec(),
            psi: states.clone(),
            psi_hat: states,
            norm_sq: exact.norm_sq,
        },
        max_deviation,
        max_norm_drift,
        step: dt,
    })
}

/// Membership residuals of one observable along one trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub observable_name: String,
    /// `‖δ_γ(X)‖`
    pub in_c_gamma: f64,
    /// `sup_j ‖δ_Ψ̂(X; t_j)‖`
    pub in_c_psi_hat: f64,
    /// `sup_j |⟨Ψ̂, δ_Ψ̂(X; t_j) Ψ̂⟩|`
    pub in_c_psi_hat_weak: f64,
    pub verdict_c_gamma: bool,
    pub verdict_c_psi_hat: bool,
    pub verdict_c_psi_hat_weak: bool,
    pub tol_class: f64,
}

/// Residual-based tests for `C_γ(H)`, `C_Ψ̂(H)` and `C_Ψ̂ʷ(H)`.
///
/// All norms are operator 2-norms, so `|⟨Ψ̂, A Ψ̂⟩| ≤ ‖A‖` makes the strong
/// verdict imply the weak one.
pub fn classify(
    name: &str,
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    trajectory: &StateTrajectory,
    tol_class: f64,
) -> Result<ClassificationReport> {
    let ctx = GammaContext::new(h.clone())?;
    let in_c_gamma = op_norm(&ctx.delta_gamma(x)?)?;
    let mut strong = 0.0f64;
    let mut weak = 0.0f64;
    for v in &trajectory.psi_hat {
        let d = delta_psi_hat(h, x, v)?;
        strong = strong.max(op_norm(&d)?);
        weak = weak.max(quadratic_form(&d, v).norm());
    }
    Ok(ClassificationReport {
        observable_name: name.to_string(),
        in_c_gamma,
        in_c_psi_hat: strong,
        in_c_psi_hat_weak: weak,
        verdict_c_gamma: in_c_gamma <= tol_class,
        verdict_c_psi_hat: strong <= tol_class,
        verdict_c_psi_hat_weak: weak <= tol_class,
        tol_class,
    })
}

/// Worst residuals of [`classify`] over trajectories started from random unit
/// states.
#[derive(Clone, Debug, Serialize)]
pub struct EnsembleClassification {
    pub observable_name: String,
    pub states: usize,
    pub worst_c_psi_hat: f64,
    pub worst_c_psi_hat_weak: f64,
    pub in_c_gamma: f64,
}

pub fn classify_ensemble(
    name: &str,
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    t_grid: &[f64],
    states: usize,
    seed: u64,
) -> Result<EnsembleClassification> {
    let mut rng = crate::ensemble::rng(seed);
    let mut worst_strong = 0.0f64;
    let mut worst_weak = 0.0f64;
    let mut in_c_gamma = 0.0;
    for _ in 0..states {
        let psi0 = crate::ensemble::random_state(&mut rng, h.rows());
        let traj = exact_trajectory(h, &psi0, t_grid)?;
        let rep = classify(name, h, x, &traj, DEFAULT_TOL_CLASS)?;
        worst_strong = worst_strong.max(rep.in_c_psi_hat);
        worst_weak = worst_weak.max(rep.in_c_psi_hat_weak);
        in_c_gamma = rep.in_c_gamma;
    }
    Ok(EnsembleClassification {
        observable_name: name.to_string(),
        states,
        worst_c_psi_hat: worst_strong,
        worst_c_psi_hat_weak: worst_weak,
        in_c_gamma,
    })
}

/// `sup_j |x_Ψ̂(t_j) − x_Ψ̂(0)/‖Ψ(t_j)‖²|` for a certified γ-symmetry `X`.
pub fn gamma_symmetry_decay_check(
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    trajectory: &StateTrajectory,
) -> Result<f64> {
    let ctx = GammaContext::new(h.clone())?;
    if x.shape() != (ctx.dim(), ctx.dim()) {
        return Err(Error::Dimension(
            "observable does not match Hamiltonian".into(),
        ));
    }
    let residual = ctx.intertwining_residual(x);
    let tol = ctx.symmetry_bound(x);
    if residual > tol {
        return Err(Error::NotSymmetry { residual, tol });
    }
    let n0 = trajectory.norm_sq.first().copied().unwrap_or(f64::NAN);
    if (n0 - 1.0).abs() > INITIAL_NORM_TOL * 10.0 {
        return Err(Error::NotNormalized {
            norm: n0.sqrt(),
            tol: INITIAL_NORM_TOL,
        });
    }
    let means = trajectory.mean_values(x);
    let x0 = means[0];
    Ok(means
        .iter()
        .zip(&trajectory.norm_sq)
        .map(|(m, n)| (m - x0 / *n).norm())
        .fold(0.0, f64::max))
}

/// Mismatch of `⟨Ψ, δ_γ(X) Ψ⟩ = i x₀ ⟨Ψ, (H† − H) Ψ⟩` on the un-normalized
/// trajectory. Requires `X` to pass the weak test on the same trajectory.
pub fn necessary_condition_residual(
    h: &ComplexMatrix,
    x: &ComplexMatrix,
    trajectory: &StateTrajectory,
    x0: C64,
    tol_class: f64,
) -> Result<f64> {
    let ctx = GammaContext::new(h.clone())?;
    let dg = ctx.delta_gamma(x)?;
    let anti = &h.adjoint() - h;
    let mut mismatch = 0.0f64;
    let mut weak = 0.0f64;
    for (psi, psi_hat) in trajectory.psi.iter().zip(&trajectory.psi_hat) {
        let lhs = quadratic_form(&dg, psi);
        let rhs = I * x0 * quadratic_form(&anti, psi);
        mismatch = mismatch.max((lhs - rhs).norm());
        weak = weak.max(mean_derivative(h, x, psi_hat)?.norm());
    }
    if weak > tol_class {
        return Err(Error::PremiseViolated {
            weak_residual: weak,
            tol: tol_class,
            mismatch,
        });
    }
    Ok(mismatch)
}
