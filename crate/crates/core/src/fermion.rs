//! Fermionic modes on `(ℂ²)^{⊗n}` and the three-mode model
//! `H = b₁†(λb₂ + μb₃)`.
//!
//! Basis vectors are labelled by occupation strings `n₁n₂…`, with mode 1 as
//! the most significant bit (for three modes `(i,j,k) ↦ 4i + 2j + k`).
//! `b_j` carries the sign `(−1)^{n₁+…+n_{j−1}}`, so that
//! `φ_{n₁n₂…} = (b₁†)^{n₁}(b₂†)^{n₂}… φ_{00…0}` with no extra phase.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{exact_trajectory, scalar_term};
use crate::gamma::GammaContext;
use crate::linalg::{basis_vector, quadratic_form, ComplexMatrix, StateVector};
use crate::C64;

pub const MAX_MODES: usize = 10;

#[derive(Clone, Debug)]
pub struct CarAlgebra {
    n_modes: usize,
    lowering: Vec<ComplexMatrix>,
    number_ops: Vec<ComplexMatrix>,
}

impl CarAlgebra {
    pub fn new(n_modes: usize) -> Result<Self> {
        if !(1..=MAX_MODES).contains(&n_modes) {
            return Err(Error::InvalidArgument(format!(
                "number of modes must be in 1..={MAX_MODES}, got {n_modes}"
            )));
        }
        let dim = 1usize << n_modes;
        let lowering: Vec<ComplexMatrix> = (0..n_modes)
            .map(|j| {
                let bit = 1usize << (n_modes - 1 - j);
                let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
                for col in (0..dim).filter(|c| c & bit != 0) {
                    let before = (col >> (n_modes - j)).count_ones();
                    let sign = if before.is_multiple_of(2) { 1.0 } else { -1.0 };
                    entries[(col ^ bit) * dim + col] = C64::new(sign, 0.0);
                }
                ComplexMatrix::from_row_major(dim, dim, &entries).expect("finite entries")
            })
            .collect();
        let number_ops = lowering.iter().map(|b| &b.adjoint() * b).collect();
        Ok(Self {
            n_modes,
            lowering,
            number_ops,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        1 << self.n_modes
    }

    /// `b_j` for `j` in `1..=n_modes`.
    pub fn lowering(&self, j: usize) -> &ComplexMatrix {
        &self.lowering[j - 1]
    }

    pub fn raising(&self, j: usize) -> ComplexMatrix {
        self.lowering[j - 1].adjoint()
    }

    /// `N_j = b_j† b_j` for `j` in `1..=n_modes`.
    pub fn number_op(&self, j: usize) -> &ComplexMatrix {
        &self.number_ops[j - 1]
    }

    /// `Σ_j N_j`
    pub fn total_number(&self) -> ComplexMatrix {
        self.number_ops
            .iter()
            .fold(ComplexMatrix::zeros(self.dim(), self.dim()), |acc, n| {
                &acc + n
            })
    }

    pub fn basis_index(&self, label: &OccupationLabel) -> Result<usize> {
        if label.0.len() != self.n_modes {
            return Err(Error::Dimension(format!(
                "label {label} has {} modes, algebra has {}",
                label.0.len(),
                self.n_modes
            )));
        }
        Ok(label.index())
    }

    pub fn basis_state(&self, label: &OccupationLabel) -> Result<StateVector> {
        Ok(basis_vector(self.dim(), self.basis_index(label)?))
    }

    /// Largest entrywise deviation from `{b_k, b_j†} = δ_kj 𝟙`, `{b_k, b_j} = 0`.
    pub fn car_defect(&self) -> f64 {
        let id = ComplexMatrix::identity(self.dim());
        let zero = ComplexMatrix::zeros(self.dim(), self.dim());
        let mut worst = 0.0f64;
        for (k, bk) in self.lowering.iter().enumerate() {
            for (j, bj) in self.lowering.iter().enumerate() {
                let bjd = bj.adjoint();
                let mixed = &(bk * &bjd) + &(&bjd * bk);
                worst = worst.max(mixed.max_abs_diff(if k == j { &id } else { &zero }));
                let pure = &(bk * bj) + &(bj * bk);
                worst = worst.max(pure.max_abs());
            }
        }
        worst
    }
}

/// Occupation string such as `011`; also accepts `phi_011` and `φ011`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OccupationLabel(Vec<u8>);

impl OccupationLabel {
    pub fn occupations(&self) -> &[u8] {
        &self.0
    }

    pub fn n_modes(&self) -> usize {
        self.0.len()
    }

    /// Column index with mode 1 as the most significant bit.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }
}

impl FromStr for OccupationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .strip_prefix("phi_")
            .or_else(|| s.strip_prefix("phi"))
            .or_else(|| s.strip_prefix('φ'))
            .unwrap_or(s);
        if digits.is_empty() || !digits.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::InvalidArgument(format!(
                "occupation label must be a string of 0/1 digits, got {s:?}"
            )));
        }
        Ok(Self(digits.bytes().map(|b| b - b'0').collect()))
    }
}

impl fmt::Display for OccupationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// `H = b₁†(λb₂ + μb₃)` on three modes.
#[derive(Clone, Debug)]
pub struct DmModel {
    algebra: CarAlgebra,
    lambda: f64,
    mu: f64,
    h: ComplexMatrix,
}

impl DmModel {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda and mu must be positive and finite, got {lambda}, {mu}"
            )));
        }
        Self::build(lambda, mu)
    }

    /// Like [`DmModel::new`] but admits zero couplings.
    pub fn with_nonnegative(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda >= 0.0 && mu >= 0.0 && lambda.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda and mu must be non-negative and finite, got {lambda}, {mu}"
            )));
        }
        Self::build(lambda, mu)
    }

    fn build(lambda: f64, mu: f64) -> Result<Self> {
        let algebra = CarAlgebra::new(3)?;
        let inner = &algebra.lowering(2).scale_real(lambda) + &algebra.lowering(3).scale_real(mu);
        let h = &algebra.raising(1) * &inner;
        Ok(Self {
            algebra,
            lambda,
            mu,
            h,
        })
    }

    pub fn algebra(&self) -> &CarAlgebra {
        &self.algebra
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    /// `U(t) = 𝟙 − iHt`, exact since `H² = 0`.
    pub fn linear_propagator(&self, t: f64) -> ComplexMatrix {
        &ComplexMatrix::identity(8) - &self.h.scale(C64::new(0.0, t))
    }

    fn closed_form_case(&self, initial: &OccupationLabel) -> Result<ClosedFormCase> {
        match initial.occupations() {
            [0, 1, 1] => Ok(ClosedFormCase::Both),
            [0, 1, 0] => Ok(ClosedFormCase::Second),
            _ => Err(Error::ClosedFormUnavailable(format!(
                "no closed form for initial state {initial}; use the simulator"
            ))),
        }
    }

    /// `(n₁, n₂, n₃)` at time `t` from the rational closed forms.
    pub fn closed_form_occupations(&self, initial: &OccupationLabel, t: f64) -> Result<[f64; 3]> {
        let (l2, m2, t2) = (self.lambda.powi(2), self.mu.powi(2), t * t);
        Ok(match self.closed_form_case(initial)? {
            ClosedFormCase::Both => {
                let d = 1.0 + (l2 + m2) * t2;
                [(l2 + m2) * t2 / d, (1.0 + m2 * t2) / d, (1.0 + l2 * t2) / d]
            }
            ClosedFormCase::Second => {
                let d = 1.0 + l2 * t2;
                [l2 * t2 / d, 1.0 / d, 0.0]
            }
        })
    }

    /// `⟨Ψ̂(t), (H† − H)Ψ̂(t)⟩` in closed form.
    ///
    /// For `φ₀₁₁` this is `−2it(λ² + μ²)/(1 + t²(λ² + μ²))`; the `λ² − μ²`
    /// numerator sometimes quoted for this case is inconsistent with
    /// `‖Ψ(t)‖² = 1 + (λ² + μ²)t²`.
    pub fn scalar_term_closed_form(&self, initial: &OccupationLabel, t: f64) -> Result<C64> {
        let (l2, m2) = (self.lambda.powi(2), self.mu.powi(2));
        let s = match self.closed_form_case(initial)? {
            ClosedFormCase::Both => l2 + m2,
            ClosedFormCase::Second => l2,
        };
        Ok(C64::new(0.0, -2.0 * t * s / (1.0 + t * t * s)))
    }

    /// Samples occupation numbers on `t_grid` from the generic propagator.
    pub fn simulate_occupations(
        &self,
        initial: &OccupationLabel,
        t_grid: &[f64],
    ) -> Result<OccupationTrajectory> {
        let phi = self.algebra.basis_state(initial)?;
        let traj = exact_trajectory(&self.h, &phi, t_grid)?;
        let mut out = OccupationTrajectory {
            initial: initial.to_string(),
            t: t_grid.to_vec(),
            n: [Vec::new(), Vec::new(), Vec::new()],
            sum: Vec::new(),
            scalar: Vec::new(),
            linear_propagator_deviation: 0.0,
        };
        for (k, (&t, v)) in t_grid.iter().zip(&traj.psi_hat).enumerate() {
            let mut total = 0.0;
            for j in 0..3 {
                let nj = quadratic_form(self.algebra.number_op(j + 1), v).re;
                out.n[j].push(nj);
                total += nj;
            }
            out.sum.push(total);
            out.scalar.push(scalar_term(&self.h, v));
            let oracle = self.linear_propagator(t).apply(&phi);
            out.linear_propagator_deviation = out
                .linear_propagator_deviation
                .max((&traj.psi[k] - oracle).norm());
        }
        Ok(out)
    }

    /// `sup_j |n_i^{sim}(t_j) − n_i^{closed}(t_j)|` over all three modes.
    pub fn closed_form_deviation(&self, initial: &OccupationLabel, t_grid: &[f64]) -> Result<f64> {
        let sim = self.simulate_occupations(initial, t_grid)?;
        let mut worst = 0.0f64;
        for (k, &t) in t_grid.iter().enumerate() {
            let cf = self.closed_form_occupations(initial, t)?;
            for j in 0..3 {
                worst = worst.max((sim.n[j][k] - cf[j]).abs());
            }
        }
        Ok(worst)
    }

    /// `sup_j |scalar_sim(t_j) − scalar_closed(t_j)|`
    pub fn scalar_term_check(&self, initial: &OccupationLabel, t_grid: &[f64]) -> Result<f64> {
        self.closed_form_case(initial)?;
        let sim = self.simulate_occupations(initial, t_grid)?;
        let mut worst = 0.0f64;
        for (s, &t) in sim.scalar.iter().zip(t_grid) {
            worst = worst.max((s - self.scalar_term_closed_form(initial, t)?).norm());
        }
        Ok(worst)
    }

    /// `iλ(b₂†b₁ − b₁†b₂)(𝟙 + N₃) + iμ(b₃†b₁ − b₁†b₃)(𝟙 + N₂)`
    pub fn delta_gamma_n_rhs(&self) -> ComplexMatrix {
        let a = &self.algebra;
        let id = ComplexMatrix::identity(8);
        let hop = |j: usize| &(&a.raising(j) * a.lowering(1)) - &(&a.raising(1) * a.lowering(j));
        let first = (&hop(2) * &(&id + a.number_op(3))).scale(C64::new(0.0, self.lambda));
        let second = (&hop(3) * &(&id + a.number_op(2))).scale(C64::new(0.0, self.mu));
        &first + &second
    }

    /// `‖δ_γ(N) − RHS‖_F` for `N = N₁ + N₂ + N₃`.
    pub fn delta_gamma_n_check(&self) -> Result<f64> {
        let ctx = GammaContext::new(self.h.clone())?;
        let lhs = ctx.delta_gamma(&self.algebra.total_number())?;
        Ok((&lhs - &self.delta_gamma_n_rhs()).frobenius_norm())
    }

    /// `‖Hφ − ⟨φ,Hφ⟩φ‖` for a basis state.
    pub fn eigen_defect(&self, initial: &OccupationLabel) -> Result<f64> {
        let phi = self.algebra.basis_state(initial)?;
        let hphi = self.h.apply(&phi);
        let e = quadratic_form(&self.h, &phi);
        Ok((hphi - phi * e).norm())
    }

    /// Fixed-width builtin observables: `N`, `N1`, `N2`, `N3`.
    pub fn builtin_observable(&self, name: &str) -> Option<ComplexMatrix> {
        match name {
            "N" => Some(self.algebra.total_number()),
            "N1" => Some(self.algebra.number_op(1).clone()),
            "N2" => Some(self.algebra.number_op(2).clone()),
            "N3" => Some(self.algebra.number_op(3).clone()),
            _ => None,
        }
    }
}

enum ClosedFormCase {
    Both,
    Second,
}

/// Occupation numbers sampled along a normalized trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct OccupationTrajectory {
    pub initial: String,
    pub t: Vec<f64>,
    pub n: [Vec<f64>; 3],
    pub sum: Vec<f64>,
    pub scalar: Vec<C64>,
    /// `sup_t ‖e^{−iHt}φ − (𝟙 − iHt)φ‖`
    pub linear_propagator_deviation: f64,
}

impl OccupationTrajectory {
    /// `sup_t |Σ_j n_j(t) − Σ_j n_j(0)|`
    pub fn sum_drift(&self) -> f64 {
        let s0 = self.sum.first().copied().unwrap_or(0.0);
        self.sum.iter().map(|s| (s - s0).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::propagator;

    fn label(s: &str) -> OccupationLabel {
        s.parse().unwrap()
    }

    fn grid(t_end: f64, points: usize) -> Vec<f64> {
        (0..points)
            .map(|k| t_end * k as f64 / (points - 1) as f64)
            .collect()
    }

    #[test]
    fn single_mode() {
        let a = CarAlgebra::new(1).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(a.lowering(1), &b);
        assert_eq!(a.car_defect(), 0.0);
        assert!(CarAlgebra::new(0).is_err());
        assert!(CarAlgebra::new(11).is_err());
    }

    #[test]
    fn three_mode_relations() {
        let a = CarAlgebra::new(3).unwrap();
        assert!(a.car_defect() < 1e-14);
        let vac = a.basis_state(&label("000")).unwrap();
        assert_eq!(a.basis_index(&label("000")).unwrap(), 0);
        for j in 1..=3 {
            let n = a.number_op(j);
            assert!((n * n).max_abs_diff(n) < 1e-15);
            assert!(a.lowering(j).apply(&vac).norm() == 0.0);
        }
        let phi110 = a.raising(1).apply(&a.raising(2).apply(&vac));
        assert_eq!(phi110, a.basis_state(&label("110")).unwrap());
        let occ: Vec<f64> = (1..=3)
            .map(|j| quadratic_form(a.number_op(j), &phi110).re)
            .collect();
        assert_eq!(occ, vec![1.0, 1.0, 0.0]);
        assert_eq!(a.basis_index(&label("phi_101")).unwrap(), 5);
        assert!(a.basis_index(&label("10")).is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!(label("φ011"), label("011"));
        assert_eq!(label("phi011").to_string(), "011");
        assert!("0x1".parse::<OccupationLabel>().is_err());
        assert!("phi_".parse::<OccupationLabel>().is_err());
    }

    #[test]
    fn model_is_nilpotent_and_validated() {
        let m = DmModel::new(1.3, 0.7).unwrap();
        assert!((m.h() * m.h()).max_abs() < 1e-14);
        for t in [0.0, 0.5, 3.0, 10.0] {
            let u = propagator(m.h(), t).unwrap();
            assert!(u.max_abs_diff(&m.linear_propagator(t)) < 1e-14 * t.max(1.0));
        }
        assert!(DmModel::new(0.0, 1.0).is_err());
        assert!(DmModel::new(1.0, -1.0).is_err());
        assert!(DmModel::with_nonnegative(0.0, 0.0).is_ok());
    }

    #[test]
    fn closed_form_values() {
        let m = DmModel::new(1.0, 1.0).unwrap();
        let v = m.closed_form_occupations(&label("011"), 1.0).unwrap();
        for x in v {
            assert!((x - 2.0 / 3.0).abs() < 1e-15);
        }
        let m = DmModel::new(2.5, 0.3).unwrap();
        assert_eq!(
            m.closed_form_occupations(&label("011"), 0.0).unwrap(),
            [0.0, 1.0, 1.0]
        );
        let m = DmModel::new(1.0, 4.0).unwrap();
        assert_eq!(
            m.closed_form_occupations(&label("010"), 1.0).unwrap(),
            [0.5, 0.5, 0.0]
        );
        assert!(matches!(
            m.closed_form_occupations(&label("110"), 1.0),
            Err(Error::ClosedFormUnavailable(_))
        ));
    }

    #[test]
    fn simulation_matches_closed_forms() {
        let m = DmModel::new(1.0, 1.0).unwrap();
        let g = grid(10.0, 201);
        assert!(m.closed_form_deviation(&label("011"), &g).unwrap() < 1e-11);
        let s = m.simulate_occupations(&label("011"), &g).unwrap();
        assert!(s.sum.iter().all(|x| (x - 2.0).abs() < 1e-11));
        assert!(s.linear_propagator_deviation < 1e-12);

        let m = DmModel::new(1.0, 2.7).unwrap();
        assert!(m.closed_form_deviation(&label("010"), &g).unwrap() < 1e-11);
        let s = m.simulate_occupations(&label("010"), &g).unwrap();
        assert!(s.sum.iter().all(|x| (x - 1.0).abs() < 1e-11));
        assert!(s.n[2].iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn asymptotics_and_monotonicity() {
        let m = DmModel::new(1.0, 2.0).unwrap();
        let s = m.simulate_occupations(&label("011"), &[1e3]).unwrap();
        assert!((s.n[1][0] - 0.8).abs() < 1e-5);
        assert!((s.n[2][0] - 0.2).abs() < 1e-5);

        let m = DmModel::new(1.0, 1.0).unwrap();
        let s = m
            .simulate_occupations(&label("011"), &grid(10.0, 201))
            .unwrap();
        for w in 1..s.t.len() {
            assert!(s.n[0][w] >= s.n[0][w - 1] - 1e-14);
            assert!(s.n[1][w] <= s.n[1][w - 1] + 1e-14);
            assert!(s.n[2][w] <= s.n[2][w - 1] + 1e-14);
        }
    }

    #[test]
    fn scalar_term_values() {
        let m = DmModel::new(2.0, 1.0).unwrap();
        let z = m.scalar_term_closed_form(&label("011"), 1.0).unwrap();
        assert!((z - C64::new(0.0, -5.0 / 3.0)).norm() < 1e-15);
        let m1 = DmModel::new(1.0, 3.0).unwrap();
        let z = m1.scalar_term_closed_form(&label("010"), 1.0).unwrap();
        assert!((z - C64::new(0.0, -1.0)).norm() < 1e-15);
        let g = grid(5.0, 51);
        for lab in ["011", "010"] {
            assert!(m.scalar_term_check(&label(lab), &g).unwrap() < 1e-11);
        }
        // equal couplings do not make the term vanish
        let eq = DmModel::new(1.0, 1.0).unwrap();
        assert!(
            eq.scalar_term_closed_form(&label("011"), 1.0)
                .unwrap()
                .norm()
                > 0.5
        );
        assert!(eq.scalar_term_check(&label("111"), &g).is_err());
    }

    #[test]
    fn delta_gamma_number_identity() {
        for (l, m) in [(1.0, 1.0), (2.0, 0.5)] {
            assert!(DmModel::new(l, m).unwrap().delta_gamma_n_check().unwrap() < 1e-12);
        }
        let zero = DmModel::with_nonnegative(0.0, 0.0).unwrap();
        assert_eq!(zero.delta_gamma_n_rhs().max_abs(), 0.0);
        assert_eq!(zero.delta_gamma_n_check().unwrap(), 0.0);
    }

    #[test]
    fn initial_states_are_not_eigenstates() {
        let m = DmModel::new(0.5, 0.5).unwrap();
        assert!(m.eigen_defect(&label("011")).unwrap() > 0.1);
        assert!(m.eigen_defect(&label("010")).unwrap() > 0.1);
    }
}
