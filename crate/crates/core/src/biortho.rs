//! Biorthogonal eigensystems `{φ_k}`, `{Ψ_k}` of a Hamiltonian with distinct
//! eigenvalues, and the metric operators `S_φ = Σ|φ_k⟩⟨φ_k|`,
//! `S_Ψ = Σ|Ψ_k⟩⟨Ψ_k|`.
//!
//! Gauge: every `φ_k` has unit Euclidean norm and `Ψ_k` carries the scale
//! that makes `⟨φ_k, Ψ_k⟩ = 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_general, hermitian_part_eigenvalues, inner, op_norm, ComplexMatrix, StateVector,
    DEFAULT_TOL_EIG,
};
use crate::C64;

pub const DEFAULT_TOL_DISTINCT: f64 = 1e-8;
pub const DEFAULT_TOL_BIORTHO: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct BiorthogonalSystem {
    pub dim: usize,
    pub eigenvalues: Vec<C64>,
    /// Columns `φ_k`, right eigenvectors of `H`.
    pub phi: ComplexMatrix,
    /// Columns `Ψ_k`, right eigenvectors of `H†`.
    pub psi: ComplexMatrix,
    pub s_phi: ComplexMatrix,
    pub s_psi: ComplexMatrix,
    /// Condition number of the `φ` eigenvector matrix.
    pub condition: f64,
    /// Set when some eigenvalue has a non-negligible imaginary part. The
    /// pairing then goes through complex conjugation.
    pub complex_spectrum: bool,
}

/// Residuals of the structural identities, all relative where a scale exists.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    /// `max_{k,l} |⟨φ_k, Ψ_l⟩ − δ_kl|`
    pub biorthogonality: f64,
    /// `‖Σ|φ_k⟩⟨Ψ_k| − 𝟙‖_F`
    pub resolution_of_identity: f64,
    /// `‖S_φ S_Ψ − 𝟙‖_F`
    pub metric_inverse: f64,
    /// `max_k ‖S_φ Ψ_k − φ_k‖` and `‖S_Ψ φ_k − Ψ_k‖`, relative to `‖φ_k‖` / `‖Ψ_k‖`.
    pub metric_maps: f64,
    pub s_phi_hermiticity: f64,
    pub s_psi_hermiticity: f64,
    pub s_phi_min_eigenvalue: f64,
    pub s_psi_min_eigenvalue: f64,
}

/// Intertwining residuals `‖S_Ψ H − H† S_Ψ‖_F / (‖H‖_F ‖S_Ψ‖_F)` and
/// `‖S_φ H† − H S_φ‖_F / (‖H‖_F ‖S_φ‖_F)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntertwiningResiduals {
    pub s_psi: f64,
    pub s_phi: f64,
}

impl IntertwiningResiduals {
    pub fn max(&self) -> f64 {
        self.s_psi.max(self.s_phi)
    }
}

fn check_distinct(eigenvalues: &[C64], threshold: f64) -> Result<()> {
    for i in 0..eigenvalues.len() {
        for j in (i + 1)..eigenvalues.len() {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= threshold {
                return Err(Error::DegenerateSpectrum {
                    first: i + 1,
                    second: j + 1,
                    first_value: eigenvalues[i].to_string(),
                    second_value: eigenvalues[j].to_string(),
                    threshold,
                });
            }
        }
    }
    Ok(())
}

/// Pairs each eigenvalue `E_k` of `H` with the eigenvalue of `H†` nearest to
/// `conj(E_k)`. Two `k` claiming the same partner is a collision.
fn pair_by_conjugate(of_h: &[C64], of_adjoint: &[C64], threshold: f64) -> Result<Vec<usize>> {
    let mut taken: Vec<Option<usize>> = vec![None; of_adjoint.len()];
    let mut pairing = Vec::with_capacity(of_h.len());
    for (k, e) in of_h.iter().enumerate() {
        let target = e.conj();
        let (l, _) = of_adjoint
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
            .expect("non-empty spectrum");
        if let Some(prev) = taken[l] {
            return Err(Error::DegenerateSpectrum {
                first: prev + 1,
                second: k + 1,
                first_value: of_h[prev].to_string(),
                second_value: e.to_string(),
                threshold,
            });
        }
        taken[l] = Some(k);
        pairing.push(l);
    }
    Ok(pairing)
}

/// Builds `{φ_k}`, `{Ψ_k}` and the metric operators of `h`.
///
/// Eigenvalues closer than `tol_distinct · ‖H‖` are rejected as degenerate.
pub fn build_biorthogonal(h: &ComplexMatrix, tol_distinct: f64) -> Result<BiorthogonalSystem> {
    h.require_square("build_biorthogonal")?;
    let n = h.rows();
    let h_norm = op_norm(h)?;
    let threshold = tol_distinct * h_norm;

    let right = eig_general(h, DEFAULT_TOL_EIG)?;
    check_distinct(&right.eigenvalues, threshold)?;
    let left = eig_general(&h.adjoint(), DEFAULT_TOL_EIG)?;
    let pairing = pair_by_conjugate(&right.eigenvalues, &left.eigenvalues, threshold)?;

    let mut phis = Vec::with_capacity(n);
    let mut psis = Vec::with_capacity(n);
    for (k, &l) in pairing.iter().enumerate() {
        let phi = right.vector(k);
        let psi = left.vector(l);
        let overlap = inner(&phi, &psi);
        if overlap.norm() < f64::EPSILON {
            return Err(Error::NoConvergence {
                residual: overlap.norm(),
                detail: format!("eigenvector pair {} is numerically orthogonal", k + 1),
            });
        }
        // ⟨φ, cΨ⟩ = c⟨φ, Ψ⟩, so c = 1/⟨φ, Ψ⟩.
        psis.push(psi / overlap);
        phis.push(phi);
    }

    let phi = ComplexMatrix::from_columns(&phis)?;
    let psi = ComplexMatrix::from_columns(&psis)?;
    let s_phi = &phi * &phi.adjoint();
    let s_psi = &psi * &psi.adjoint();
    let complex_spectrum = right
        .eigenvalues
        .iter()
        .any(|e| e.im.abs() > threshold.max(1e-12));

    Ok(BiorthogonalSystem {
        dim: n,
        eigenvalues: right.eigenvalues,
        phi,
        psi,
        s_phi,
        s_psi,
        condition: right.condition_estimate,
        complex_spectrum,
    })
}

impl BiorthogonalSystem {
    pub fn phi_k(&self, k: usize) -> StateVector {
        self.phi.column(k)
    }

    pub fn psi_k(&self, k: usize) -> StateVector {
        self.psi.column(k)
    }

    /// `f = Σ_k ⟨φ_k, f⟩ Ψ_k`
    pub fn expand_in_psi(&self, f: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.dim);
        for k in 0..self.dim {
            out += self.psi_k(k) * inner(&self.phi_k(k), f);
        }
        out
    }

    /// `f = Σ_k ⟨Ψ_k, f⟩ φ_k`
    pub fn expand_in_phi(&self, f: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.dim);
        for k in 0..self.dim {
            out += self.phi_k(k) * inner(&self.psi_k(k), f);
        }
        out
    }

    pub fn invariant_report(&self) -> Result<InvariantReport> {
        let n = self.dim;
        let id = ComplexMatrix::identity(n);
        let gram = &self.phi.adjoint() * &self.psi;
        let biorthogonality = gram.max_abs_diff(&id);
        let resolution_of_identity = (&(&self.phi * &self.psi.adjoint()) - &id).frobenius_norm();
        let metric_inverse = (&(&self.s_phi * &self.s_psi) - &id).frobenius_norm();
        let mut metric_maps = 0.0f64;
        for k in 0..n {
            let (phi, psi) = (self.phi_k(k), self.psi_k(k));
            metric_maps = metric_maps
                .max((self.s_phi.apply(&psi) - &phi).norm() / phi.norm())
                .max((self.s_psi.apply(&phi) - &psi).norm() / psi.norm());
        }
        Ok(InvariantReport {
            biorthogonality,
            resolution_of_identity,
            metric_inverse,
            metric_maps,
            s_phi_hermiticity: self.s_phi.hermiticity_defect(),
            s_psi_hermiticity: self.s_psi.hermiticity_defect(),
            s_phi_min_eigenvalue: hermitian_part_eigenvalues(&self.s_phi)?[0],
            s_psi_min_eigenvalue: hermitian_part_eigenvalues(&self.s_psi)?[0],
        })
    }
}

/// Checks `S_Ψ H = H† S_Ψ` and `S_φ H† = H S_φ`.
pub fn verify_intertwining(
    sys: &BiorthogonalSystem,
    h: &ComplexMatrix,
) -> Result<IntertwiningResiduals> {
    if h.shape() != (sys.dim, sys.dim) {
        return Err(Error::Dimension(format!(
            "system has dimension {}, Hamiltonian is {:?}",
            sys.dim,
            h.shape()
        )));
    }
    let hd = h.adjoint();
    let h_f = h.frobenius_norm();
    let rel = |num: f64, s: &ComplexMatrix| {
        let scale = h_f * s.frobenius_norm();
        if scale == 0.0 {
            num
        } else {
            num / scale
        }
    };
    let r_psi = (&(&sys.s_psi * h) - &(&hd * &sys.s_psi)).frobenius_norm();
    let r_phi = (&(&sys.s_phi * &hd) - &(h * &sys.s_phi)).frobenius_norm();
    Ok(IntertwiningResiduals {
        s_psi: rel(r_psi, &sys.s_psi),
        s_phi: rel(r_phi, &sys.s_phi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn hermitian_case_collapses_to_orthonormal() {
        let h = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let sys = build_biorthogonal(&h, DEFAULT_TOL_DISTINCT).unwrap();
        let id = ComplexMatrix::identity(2);
        assert!(sys.s_phi.max_abs_diff(&id) < 1e-14);
        assert!(sys.s_psi.max_abs_diff(&id) < 1e-14);
        for k in 0..2 {
            assert!((sys.phi_k(k) - sys.psi_k(k)).norm() < 1e-14);
        }
        let r = verify_intertwining(&sys, &h).unwrap();
        assert!(r.max() < 1e-12);
        assert!(!sys.complex_spectrum);
    }

    /// Hand solution for H = [[1,1],[0,2]]:
    /// φ₁ = (1,0), φ₂ = (1,1)/√2; H† = [[1,0],[1,2]] has Ψ₁ ∝ (1,−1), Ψ₂ ∝ (0,1).
    /// ⟨φ₁,Ψ₁⟩ = 1 fixes Ψ₁ = (1,−1); ⟨φ₂,Ψ₂⟩ = 1 fixes Ψ₂ = (0,√2).
    #[test]
    fn upper_triangular_hand_solution() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 2.0]]).unwrap();
        let sys = build_biorthogonal(&h, DEFAULT_TOL_DISTINCT).unwrap();
        let s2 = 2f64.sqrt();

        let phi1 = sys.phi_k(0);
        let phase1 = phi1[0];
        assert!((phase1.norm() - 1.0).abs() < 1e-14 && phi1[1].norm() < 1e-14);
        let psi1 = sys.psi_k(0) * phase1; // undo the gauge phase carried by φ₁
        assert!((psi1[0] - c(1.0)).norm() < 1e-13 && (psi1[1] - c(-1.0)).norm() < 1e-13);

        let phi2 = sys.phi_k(1);
        let phase2 = phi2[0] * s2;
        assert!((phi2[1] * s2 - phase2).norm() < 1e-13);
        let psi2 = sys.psi_k(1) * phase2;
        assert!(psi2[0].norm() < 1e-13 && (psi2[1] - c(s2)).norm() < 1e-13);

        let rep = sys.invariant_report().unwrap();
        assert!(rep.biorthogonality < 1e-13);
        assert!(rep.resolution_of_identity < 1e-13);
        assert!(rep.metric_inverse < 1e-13);
        assert!(rep.s_phi_min_eigenvalue > 0.0 && rep.s_psi_min_eigenvalue > 0.0);
        assert!(verify_intertwining(&sys, &h).unwrap().max() < 1e-10);
    }

    #[test]
    fn nilpotent_is_degenerate() {
        let h = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        match build_biorthogonal(&h, DEFAULT_TOL_DISTINCT) {
            Err(Error::DegenerateSpectrum { first, second, .. }) => {
                assert_eq!((first, second), (1, 2))
            }
            other => panic!("expected degenerate spectrum, got {other:?}"),
        }
    }

    #[test]
    fn complex_spectrum_is_flagged_not_rejected() {
        let h = ComplexMatrix::from_diagonal(&[C64::new(1.0, 0.5), C64::new(-1.0, 0.0)]);
        let sys = build_biorthogonal(&h, DEFAULT_TOL_DISTINCT).unwrap();
        assert!(sys.complex_spectrum);
        assert!(sys.invariant_report().unwrap().biorthogonality < 1e-14);
    }

    #[test]
    fn dimension_mismatch_in_verification() {
        let h = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
        let sys = build_biorthogonal(&h, DEFAULT_TOL_DISTINCT).unwrap();
        assert!(verify_intertwining(&sys, &ComplexMatrix::identity(3)).is_err());
    }
}
