use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::biortho::{
    build_biorthogonal, verify_intertwining, IntertwiningResiduals, InvariantReport,
};
use crate::eigenstate::{weak_identity_report, EigenstateContext, WeakIdentityReport};
use crate::ensemble::{random_matrix, rng};
use crate::error::Error;
use crate::flow::{
    classify, classify_ensemble, delta_psi_hat, exact_trajectory, frozen_series,
    gamma_symmetry_decay_check, h_nl, integrate_nonlinear, necessary_condition_residual,
    scalar_term, ClassificationReport, EnsembleClassification, StateTrajectory,
};
use crate::gamma::{GammaContext, SYMMETRY_CERT_REL};
use crate::linalg::{op_norm, quadratic_form, ComplexMatrix};
use crate::C64;

use super::config::{Prepared, ScenarioConfig, Task};
use super::csv::emit_csv;
use super::ScenarioError;

pub const REPORT_FILE: &str = "report.json";
const FERMION_CSV: &str = "fermion_demo.csv";
const TRAJECTORY_CSV: &str = "trajectory.csv";
const SYMMETRY_TIMES: [f64; 3] = [0.5, 1.0, 2.0];
/// Largest `rate = 4‖H‖t` at which the frozen series is still summed in
/// floating point without total cancellation.
const EXPLORATORY_MAX_RATE: f64 = 20.0;
const EXPLORATORY_MAX_POINTS: usize = 21;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory for CSV files and the report; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
    pub max_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TaskOutcome<T> {
    Ok { result: T },
    Failed { error: String },
}

impl<T> TaskOutcome<T> {
    fn from_result(r: Result<T, ScenarioError>) -> Self {
        match r {
            Ok(result) => TaskOutcome::Ok { result },
            Err(e) => TaskOutcome::Failed {
                error: e.to_string(),
            },
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, TaskOutcome::Ok { .. })
    }

    pub fn result(&self) -> Option<&T> {
        match self {
            TaskOutcome::Ok { result } => Some(result),
            TaskOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Artifact {
    pub task: Task,
    pub file: String,
    pub columns: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianSummary {
    pub dim: usize,
    pub op_norm: f64,
    /// `‖H − H†‖_F`
    pub hermiticity_defect: f64,
    pub hermitian: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilaritySummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimilaritySummary {
    /// `‖[H₀, R†R]‖`
    pub commutator_residual: f64,
    pub r_condition: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InitialStateSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Norm as supplied; the run uses the normalized vector.
    pub input_norm: f64,
    pub normalized: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BiorthoSection {
    pub eigenvalues: Vec<C64>,
    pub condition: f64,
    pub complex_spectrum: bool,
    pub invariants: InvariantReport,
    pub intertwining: IntertwiningResiduals,
    /// `1e-8 · κ(V)`
    pub residual_bound: f64,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetriesSection {
    pub dimension: usize,
    pub generators: Vec<ComplexMatrix>,
    /// `‖H†X − XH‖_F` per generator.
    pub residuals: Vec<f64>,
    pub all_certified: bool,
    pub chain_closure_dim: usize,
    /// `max ‖H†XH^k − XH^{k+1}‖_F / (‖H‖^{k+1} ‖X‖_F)` over generators and `k < N`.
    pub chain_relative_residual: f64,
    /// `max ‖γ^t(X) − X‖` over generators and `t ∈ {0.5, 1, 2}`.
    pub fixed_point_residual: f64,
    /// `max ‖δ_γ(X)‖` over generators.
    pub derivation_residual: f64,
    /// `sup_t ‖e^{iH†t}e^{−iHt} − 𝟙‖` on the time grid.
    pub norm_preservation_defect: f64,
    /// `max sup_t |x(t) − x(0)/‖Ψ(t)‖²|` over generators, when an initial state is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_law_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegratorSummary {
    pub substeps: usize,
    pub step: f64,
    pub max_deviation: f64,
    pub max_norm_drift: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySection {
    pub points: usize,
    pub norm_sq_min: f64,
    pub norm_sq_max: f64,
    pub norm_sq_final: f64,
    /// `sup_t ‖H_nl + H_nl† − (H + H†)‖`
    pub sum_rule_residual: f64,
    /// `sup_t |d‖Ψ‖²/dt − i⟨Ψ,(H†−H)Ψ⟩| / max(1, |d‖Ψ‖²/dt|)` by central differences.
    pub norm_derivative_residual: f64,
    pub integrator: TaskOutcome<IntegratorSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NecessaryCondition {
    pub name: String,
    pub x0: C64,
    pub outcome: TaskOutcome<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifySection {
    pub reports: Vec<ClassificationReport>,
    /// Evaluated for observables passing the weak test.
    pub necessary_condition: Vec<NecessaryCondition>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ensemble: Vec<EnsembleClassification>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenstateSection {
    pub weak_identities: WeakIdentityReport,
    /// `sup_t ‖β^t(X) − γ̂^t(X)‖` for the random `X` of the witness.
    pub series_conjugation_gap: f64,
    pub series_max_terms: usize,
    /// `sup_t ‖δ_Ψ̂(X; Ψ̂(t)) − (δ_γ(X) − 2E_i X)‖`
    pub fixed_derivation_gap: f64,
    /// `|⟨φ, (δ_γ(X) − 2E_i X) φ⟩|` per configured observable.
    pub observable_derivatives: Vec<NamedValue>,
}

/// Diagnostics for the conjecture that the frozen series reproduces mean
/// values whenever `δ_Ψ̂` is time-independent. No correctness claim.
#[derive(Clone, Debug, Serialize)]
pub struct ExploratorySection {
    /// `sup_t |⟨Ψ̂,(H†−H)Ψ̂⟩(t) − ⟨Ψ̂,(H†−H)Ψ̂⟩(t₀)|`; zero iff `δ_Ψ̂` is frozen.
    pub scalar_variation: f64,
    /// Largest `t − t₀` evaluated (series summation limit).
    pub horizon: f64,
    /// `sup_t |⟨Ψ̂(t₀), S_t(X) Ψ̂(t₀)⟩ − x_Ψ̂(t)|` with `S_t` the frozen series.
    pub mean_value_gap: Vec<NamedValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FermionSection {
    pub lambda: f64,
    pub mu: f64,
    pub initial: String,
    pub sum_initial: f64,
    pub sum_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closed_form_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar_term_deviation: Option<f64>,
    /// `‖δ_γ(N) − iλ(b₂†b₁ − b₁†b₂)(𝟙+N₃) − iμ(b₃†b₁ − b₁†b₃)(𝟙+N₂)‖_F`
    pub delta_gamma_n_residual: f64,
    /// `‖Hφ − ⟨φ,Hφ⟩φ‖` for the initial state.
    pub eigen_defect: f64,
    pub linear_propagator_deviation: f64,
    pub number_classification: ClassificationReport,
    pub number_necessary_condition: TaskOutcome<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config: ScenarioConfig,
    pub hamiltonian: HamiltonianSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateSummary>,
    pub tasks_run: Vec<Task>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub biortho: Option<TaskOutcome<BiorthoSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetries: Option<TaskOutcome<SymmetriesSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TaskOutcome<TrajectorySection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classify: Option<TaskOutcome<ClassifySection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenstate_case: Option<TaskOutcome<EigenstateSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fermion_demo: Option<TaskOutcome<FermionSection>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exploratory: Option<TaskOutcome<ExploratorySection>>,
    pub artifacts: Vec<Artifact>,
    pub exit_status: i32,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

struct Runner<'a> {
    config: &'a ScenarioConfig,
    prep: &'a Prepared,
    out_dir: Option<&'a Path>,
    artifacts: Vec<Artifact>,
    trajectory: Option<StateTrajectory>,
}

/// Runs every requested task. Validation problems are returned as errors;
/// numerical failures are recorded per task and yield exit status 3.
pub fn run(config: &ScenarioConfig, options: &RunOptions) -> Result<RunReport, ScenarioError> {
    let max_dim = if options.max_dim == 0 {
        super::DEFAULT_MAX_DIM
    } else {
        options.max_dim
    };
    let prep = config.prepare(max_dim)?;
    if let Some(dir) = &options.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| ScenarioError::Io(format!("{}: {e}", dir.display())))?;
    }
    let mut runner = Runner {
        config,
        prep: &prep,
        out_dir: options.out_dir.as_deref(),
        artifacts: Vec::new(),
        trajectory: None,
    };

    let h = &prep.h;
    let hermiticity_defect = h.hermiticity_defect();
    let hamiltonian = HamiltonianSummary {
        dim: h.rows(),
        op_norm: op_norm(h)?,
        hermiticity_defect,
        hermitian: hermiticity_defect <= 1e-12 * h.frobenius_norm().max(1.0),
        similarity: prep.similarity.as_ref().map(|s| SimilaritySummary {
            commutator_residual: s.commutator_residual,
            r_condition: s.r_condition,
        }),
    };
    let initial_state = prep.input_norm.map(|norm| InitialStateSummary {
        label: prep.initial_label.as_ref().map(ToString::to_string),
        input_norm: norm,
        normalized: norm != 1.0,
    });

    let mut report = RunReport {
        tool: "nhdyn".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        hamiltonian,
        initial_state,
        tasks_run: prep.tasks.clone(),
        biortho: None,
        symmetries: None,
        trajectory: None,
        classify: None,
        eigenstate_case: None,
        fermion_demo: None,
        exploratory: None,
        artifacts: Vec::new(),
        exit_status: 0,
    };

    let mut io_error = None;
    let mut numeric_failure = false;
    for &task in &prep.tasks {
        macro_rules! record {
            ($slot:expr, $result:expr) => {{
                let result = $result;
                match &result {
                    Err(ScenarioError::Io(msg)) => io_error = Some(msg.clone()),
                    Err(_) => numeric_failure = true,
                    Ok(_) => {}
                }
                $slot = Some(TaskOutcome::from_result(result));
            }};
        }
        match task {
            Task::Biortho => record!(report.biortho, runner.biortho()),
            Task::Symmetries => record!(report.symmetries, runner.symmetries()),
            Task::Trajectory => record!(report.trajectory, runner.trajectory_task()),
            Task::Classify => record!(report.classify, runner.classify()),
            Task::EigenstateCase => record!(report.eigenstate_case, runner.eigenstate()),
            Task::FermionDemo => record!(report.fermion_demo, runner.fermion()),
        }
    }
    if config.exploratory && prep.psi0.is_some() {
        let result = runner.exploratory();
        if result.is_err() {
            numeric_failure = true;
        }
        report.exploratory = Some(TaskOutcome::from_result(result));
    }

    report.artifacts = runner.artifacts;
    report.exit_status = if io_error.is_some() {
        1
    } else if numeric_failure {
        3
    } else {
        0
    };
    if let Some(dir) = &options.out_dir {
        let path = dir.join(REPORT_FILE);
        std::fs::write(&path, report.to_json())
            .map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(report)
}

impl Runner<'_> {
    fn psi0(&self) -> &crate::StateVector {
        self.prep
            .psi0
            .as_ref()
            .expect("validated: initial state present")
    }

    fn exact(&mut self) -> Result<&StateTrajectory, ScenarioError> {
        if self.trajectory.is_none() {
            self.trajectory = Some(exact_trajectory(
                &self.prep.h,
                self.psi0(),
                &self.prep.grid,
            )?);
        }
        Ok(self.trajectory.as_ref().expect("just filled"))
    }

    fn write_csv(
        &mut self,
        task: Task,
        file: &str,
        columns: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<(), ScenarioError> {
        if let Some(dir) = self.out_dir {
            emit_csv(&dir.join(file), &columns, rows)?;
            self.artifacts.push(Artifact {
                task,
                file: file.to_string(),
                columns,
            });
        }
        Ok(())
    }

    fn biortho(&mut self) -> Result<BiorthoSection, ScenarioError> {
        let h = &self.prep.h;
        let sys = build_biorthogonal(h, self.config.tolerances.tol_distinct)?;
        let invariants = sys.invariant_report()?;
        let intertwining = verify_intertwining(&sys, h)?;
        let residual_bound = 1e-8 * sys.condition;
        let worst = [
            invariants.biorthogonality,
            invariants.resolution_of_identity,
            invariants.metric_inverse,
            intertwining.max(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        Ok(BiorthoSection {
            eigenvalues: sys.eigenvalues.clone(),
            condition: sys.condition,
            complex_spectrum: sys.complex_spectrum,
            invariants,
            intertwining,
            residual_bound,
            within_bound: worst <= residual_bound,
        })
    }

    fn symmetries(&mut self) -> Result<SymmetriesSection, ScenarioError> {
        let ctx = GammaContext::new(self.prep.h.clone())?;
        let basis = ctx.gamma_symmetry_basis(self.config.tolerances.rank_tol_rel)?;
        let h_norm = ctx.h_norm();
        let mut chain_rel = 0.0f64;
        let mut fixed = 0.0f64;
        let mut derivation = 0.0f64;
        for x in &basis.generators {
            let scale = x.frobenius_norm();
            for (k, member) in ctx.chain(x)?.iter().enumerate() {
                let denom = h_norm.powi(k as i32 + 1) * scale;
                if denom > 0.0 {
                    chain_rel = chain_rel.max(ctx.intertwining_residual(member) / denom);
                }
            }
            for t in SYMMETRY_TIMES {
                fixed = fixed.max(op_norm(&(&ctx.gamma_t(x, t)? - x))?);
            }
            derivation = derivation.max(op_norm(&ctx.delta_gamma(x)?)?);
        }
        let all_certified = basis.generators.iter().all(|x| ctx.certifies_symmetry(x))
            && chain_rel <= SYMMETRY_CERT_REL;
        let norm_preservation_defect = ctx.norm_preservation_defect(&self.prep.grid)?;
        let decay_law_residual = if self.prep.psi0.is_some() && !basis.is_empty() {
            let h = self.prep.h.clone();
            let traj = self.exact()?;
            let mut worst = 0.0f64;
            for x in &basis.generators {
                worst = worst.max(gamma_symmetry_decay_check(&h, x, traj)?);
            }
            Some(worst)
        } else {
            None
        };
        Ok(SymmetriesSection {
            dimension: basis.len(),
            residuals: basis.residuals.clone(),
            chain_closure_dim: basis.chain_closure_dim,
            generators: basis.generators,
            all_certified,
            chain_relative_residual: chain_rel,
            fixed_point_residual: fixed,
            derivation_residual: derivation,
            norm_preservation_defect,
            decay_law_residual,
        })
    }

    fn trajectory_task(&mut self) -> Result<TrajectorySection, ScenarioError> {
        let h = self.prep.h.clone();
        let herm_part = &h + &h.adjoint();
        let grid = self.prep.grid.clone();
        let psi0 = self.psi0().clone();
        let traj = self.exact()?.clone();

        let mut sum_rule = 0.0f64;
        for v in &traj.psi_hat {
            let hn = h_nl(&h, v)?;
            sum_rule = sum_rule.max(op_norm(&(&(&hn + &hn.adjoint()) - &herm_part))?);
        }
        let ctx = GammaContext::new(h.clone())?;
        let norm_derivative_residual = ctx
            .identity_norm_evolution(&psi0, &grid)?
            .iter()
            .map(|s| s.fd_residual / s.derivative.abs().max(1.0))
            .fold(0.0, f64::max);
        let integrator = TaskOutcome::from_result(
            integrate_nonlinear(&h, &psi0, &grid, self.config.substeps)
                .map(|r| IntegratorSummary {
                    substeps: self.config.substeps,
                    step: r.step,
                    max_deviation: r.max_deviation,
                    max_norm_drift: r.max_norm_drift,
                })
                .map_err(ScenarioError::from),
        );

        let mut columns = vec!["t".to_string(), "norm_sq".to_string()];
        for (name, _) in &self.prep.observables {
            columns.push(format!("{name}_re"));
            columns.push(format!("{name}_im"));
        }
        let means: Vec<Vec<C64>> = self
            .prep
            .observables
            .iter()
            .map(|(_, x)| traj.mean_values(x))
            .collect();
        let rows = (0..traj.len())
            .map(|j| {
                let mut row = vec![traj.t_grid[j], traj.norm_sq[j]];
                for m in &means {
                    row.push(m[j].re);
                    row.push(m[j].im);
                }
                row
            })
            .collect();
        self.write_csv(Task::Trajectory, TRAJECTORY_CSV, columns, rows)?;

        let fold = |f: fn(f64, f64) -> f64, init: f64| traj.norm_sq.iter().copied().fold(init, f);
        Ok(TrajectorySection {
            points: traj.len(),
            norm_sq_min: fold(f64::min, f64::INFINITY),
            norm_sq_max: fold(f64::max, f64::NEG_INFINITY),
            norm_sq_final: *traj.norm_sq.last().expect("grid has ≥ 2 points"),
            sum_rule_residual: sum_rule,
            norm_derivative_residual,
            integrator,
        })
    }

    fn classify(&mut self) -> Result<ClassifySection, ScenarioError> {
        let h = self.prep.h.clone();
        let tol = self.config.tolerances.tol_class;
        let traj = self.exact()?.clone();
        let mut reports = Vec::new();
        let mut necessary = Vec::new();
        let mut ensemble = Vec::new();
        for (name, x) in &self.prep.observables {
            let rep = classify(name, &h, x, &traj, tol)?;
            if rep.verdict_c_psi_hat_weak {
                let x0 = quadratic_form(x, &traj.psi_hat[0]);
                necessary.push(NecessaryCondition {
                    name: name.clone(),
                    x0,
                    outcome: TaskOutcome::from_result(
                        necessary_condition_residual(&h, x, &traj, x0, tol)
                            .map_err(ScenarioError::from),
                    ),
                });
            }
            reports.push(rep);
            if self.config.ensemble_size > 0 {
                ensemble.push(classify_ensemble(
                    name,
                    &h,
                    x,
                    &self.prep.grid,
                    self.config.ensemble_size,
                    self.config.seed,
                )?);
            }
        }
        Ok(ClassifySection {
            reports,
            necessary_condition: necessary,
            ensemble,
        })
    }

    fn eigenstate(&mut self) -> Result<EigenstateSection, ScenarioError> {
        let h = &self.prep.h;
        let n = h.rows();
        let ctx = EigenstateContext::new(h, self.config.eigen_index)?;
        let mut r = rng(self.config.seed);
        let x = random_matrix(&mut r, n, n);
        let y = random_matrix(&mut r, n, n);
        let grid = &self.prep.grid;
        let weak = weak_identity_report(&ctx, grid, &x, &y)?;

        let mut gap = 0.0f64;
        let mut terms = 0usize;
        for &t in grid {
            let beta = ctx.beta_series(&x, t, self.config.tolerances.tol_trunc)?;
            terms = terms.max(beta.terms_used);
            gap = gap.max(op_norm(&(&beta.value - &ctx.gamma_hat(&x, t)?))?);
        }
        let fixed = ctx.special_delta(&x)?;
        let traj = exact_trajectory(h, ctx.phi(), grid)?;
        let mut fixed_gap = 0.0f64;
        for v in &traj.psi_hat {
            fixed_gap = fixed_gap.max(op_norm(&(&delta_psi_hat(h, &x, v)? - &fixed))?);
        }
        let observable_derivatives = self
            .prep
            .observables
            .iter()
            .map(|(name, obs)| {
                Ok(NamedValue {
                    name: name.clone(),
                    value: quadratic_form(&ctx.special_delta(obs)?, ctx.phi()).norm(),
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        Ok(EigenstateSection {
            weak_identities: weak,
            series_conjugation_gap: gap,
            series_max_terms: terms,
            fixed_derivation_gap: fixed_gap,
            observable_derivatives,
        })
    }

    fn fermion(&mut self) -> Result<FermionSection, ScenarioError> {
        let model = self
            .prep
            .model
            .as_ref()
            .expect("validated: fermion model present");
        let label = self
            .prep
            .initial_label
            .as_ref()
            .expect("validated: label present");
        let grid = self.prep.grid.clone();
        let sim = model.simulate_occupations(label, &grid)?;
        let optional = |r: crate::Result<f64>| match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::ClosedFormUnavailable(_)) => Ok(None),
            Err(e) => Err(e),
        };
        let closed_form_deviation = optional(model.closed_form_deviation(label, &grid))?;
        let scalar_term_deviation = optional(model.scalar_term_check(label, &grid))?;

        let columns: Vec<String> = ["t", "n1", "n2", "n3", "sum", "scalar_re", "scalar_im"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows = (0..sim.t.len())
            .map(|j| {
                vec![
                    sim.t[j],
                    sim.n[0][j],
                    sim.n[1][j],
                    sim.n[2][j],
                    sim.sum[j],
                    sim.scalar[j].re,
                    sim.scalar[j].im,
                ]
            })
            .collect();
        self.write_csv(Task::FermionDemo, FERMION_CSV, columns, rows)?;

        let h = model.h().clone();
        let number = model.algebra().total_number();
        let traj = self.exact()?.clone();
        let tol = self.config.tolerances.tol_class;
        let number_classification = classify("N", &h, &number, &traj, tol)?;
        let x0 = C64::new(sim.sum[0], 0.0);
        let number_necessary_condition = TaskOutcome::from_result(
            necessary_condition_residual(&h, &number, &traj, x0, tol).map_err(ScenarioError::from),
        );
        Ok(FermionSection {
            lambda: model.lambda(),
            mu: model.mu(),
            initial: label.to_string(),
            sum_initial: sim.sum[0],
            sum_drift: sim.sum_drift(),
            closed_form_deviation,
            scalar_term_deviation,
            delta_gamma_n_residual: model.delta_gamma_n_check()?,
            eigen_defect: model.eigen_defect(label)?,
            linear_propagator_deviation: sim.linear_propagator_deviation,
            number_classification,
            number_necessary_condition,
        })
    }

    fn exploratory(&mut self) -> Result<ExploratorySection, ScenarioError> {
        let h = self.prep.h.clone();
        let psi0 = self.psi0().clone();
        let traj = self.exact()?.clone();
        let s0 = scalar_term(&h, &traj.psi_hat[0]);
        let scalar_variation = traj
            .psi_hat
            .iter()
            .map(|v| (scalar_term(&h, v) - s0).norm())
            .fold(0.0, f64::max);

        let h_norm = op_norm(&h)?;
        let t0 = traj.t_grid[0];
        let horizon_limit = if h_norm > 0.0 {
            EXPLORATORY_MAX_RATE / (4.0 * h_norm)
        } else {
            f64::INFINITY
        };
        let stride = traj.len().div_ceil(EXPLORATORY_MAX_POINTS).max(1);
        let sample: Vec<usize> = (0..traj.len())
            .step_by(stride)
            .filter(|&j| traj.t_grid[j] - t0 <= horizon_limit)
            .collect();
        let horizon = sample.last().map_or(0.0, |&j| traj.t_grid[j] - t0);

        let mut mean_value_gap = Vec::new();
        for (name, x) in &self.prep.observables {
            let means = traj.mean_values(x);
            let mut worst = 0.0f64;
            for &j in &sample {
                let s = frozen_series(
                    &h,
                    x,
                    &psi0,
                    traj.t_grid[j] - t0,
                    self.config.tolerances.tol_trunc,
                )?;
                worst = worst.max((quadratic_form(&s.value, &psi0) - means[j]).norm());
            }
            mean_value_gap.push(NamedValue {
                name: name.clone(),
                value: worst,
            });
        }
        Ok(ExploratorySection {
            scalar_variation,
            horizon,
            mean_value_gap,
        })
    }
}
