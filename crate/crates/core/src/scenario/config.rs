use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::biortho::DEFAULT_TOL_DISTINCT;
use crate::fermion::{DmModel, OccupationLabel};
use crate::flow::{DEFAULT_GRID_POINTS, DEFAULT_TOL_CLASS};
use crate::gamma::{similar_norm_preserving, SimilarityConstruction, DEFAULT_TOL_TRUNC};
use crate::linalg::{ComplexMatrix, StateVector, DEFAULT_RANK_TOL_REL};
use crate::C64;

use super::ScenarioError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SUBSTEPS: usize = 8;
pub const DEFAULT_MAX_DIM: usize = 64;
pub const MAX_DIM_ENV: &str = "NHDYN_MAX_DIM";

/// A scenario document. Absent optional fields are filled with defaults at
/// parse time, so serializing a parsed config yields the complete echo.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub hamiltonian: HamiltonianSpec,
    #[serde(default)]
    pub initial_state: Option<InitialState>,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// 0-based index into the spectrum sorted by (Re, Im).
    #[serde(default)]
    pub eigen_index: usize,
    /// Random initial states for the ensemble classification (0 disables it).
    #[serde(default)]
    pub ensemble_size: usize,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default)]
    pub exploratory: bool,
}

fn default_tasks() -> Vec<Task> {
    vec![Task::Trajectory]
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_substeps() -> usize {
    DEFAULT_SUBSTEPS
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum HamiltonianSpec {
    Inline(ComplexMatrix),
    Generator(GeneratorSpec),
}

impl<'de> Deserialize<'de> for HamiltonianSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        match value {
            serde_json::Value::Array(_) => ComplexMatrix::deserialize(value)
                .map(HamiltonianSpec::Inline)
                .map_err(D::Error::custom),
            serde_json::Value::Object(_) => GeneratorSpec::deserialize(value)
                .map(HamiltonianSpec::Generator)
                .map_err(D::Error::custom),
            _ => Err(D::Error::custom(
                "expected a matrix of [re, im] pairs, {\"fermion_dm\": {...}} or {\"similar\": {...}}",
            )),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    FermionDm { lambda: f64, mu: f64 },
    Similar { h0: ComplexMatrix, r: ComplexMatrix },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Vector(Vec<C64>),
    Label(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_t_end() -> f64 {
    10.0
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: default_t_end(),
            points: default_points(),
        }
    }
}

impl TimeSpec {
    pub fn grid(&self) -> Vec<f64> {
        let span = self.t_end - self.t_start;
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| self.t_start + span * k as f64 / last)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    Builtin(String),
    Named { name: String, matrix: ComplexMatrix },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol_class")]
    pub tol_class: f64,
    #[serde(default = "default_tol_trunc")]
    pub tol_trunc: f64,
    #[serde(default = "default_rank_tol")]
    pub rank_tol_rel: f64,
    #[serde(default = "default_tol_distinct")]
    pub tol_distinct: f64,
}

fn default_tol_class() -> f64 {
    DEFAULT_TOL_CLASS
}

fn default_tol_trunc() -> f64 {
    DEFAULT_TOL_TRUNC
}

fn default_rank_tol() -> f64 {
    DEFAULT_RANK_TOL_REL
}

fn default_tol_distinct() -> f64 {
    DEFAULT_TOL_DISTINCT
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_class: DEFAULT_TOL_CLASS,
            tol_trunc: DEFAULT_TOL_TRUNC,
            rank_tol_rel: DEFAULT_RANK_TOL_REL,
            tol_distinct: DEFAULT_TOL_DISTINCT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Biortho,
    Symmetries,
    Trajectory,
    Classify,
    EigenstateCase,
    FermionDemo,
}

impl ScenarioConfig {
    /// Parses JSON, reporting the offending field path on failure.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let location = if inner.line() > 0 {
                format!(" (line {}, column {})", inner.line(), inner.column())
            } else {
                String::new()
            };
            ScenarioError::Validation(format!("{path}: {inner}{location}"))
        })
    }

    /// Checks every invariant and materializes the numerical inputs.
    pub fn prepare(&self, max_dim: usize) -> Result<Prepared, ScenarioError> {
        let invalid = |msg: String| Err(ScenarioError::Validation(msg));
        if !(self.time.t_start.is_finite() && self.time.t_end.is_finite()) {
            return invalid("time.t_start and time.t_end must be finite".into());
        }
        if self.time.points < 2 {
            return invalid("time.points must be ≥ 2".into());
        }
        if self.time.t_end <= self.time.t_start {
            return invalid("time.t_end must be greater than time.t_start".into());
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("tol_class", tol.tol_class),
            ("tol_trunc", tol.tol_trunc),
            ("rank_tol_rel", tol.rank_tol_rel),
            ("tol_distinct", tol.tol_distinct),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!(
                    "tolerances.{name} must be strictly positive, got {v}"
                ));
            }
        }
        if tol.rank_tol_rel >= 1.0 {
            return invalid("tolerances.rank_tol_rel must be below 1".into());
        }
        if self.tasks.is_empty() {
            return invalid("tasks must name at least one task".into());
        }
        if self.substeps == 0 {
            return invalid("substeps must be ≥ 1".into());
        }

        let mut model = None;
        let mut similarity = None;
        let h = match &self.hamiltonian {
            HamiltonianSpec::Inline(m) => m.clone(),
            HamiltonianSpec::Generator(GeneratorSpec::FermionDm { lambda, mu }) => {
                let m = DmModel::new(*lambda, *mu).map_err(|e| {
                    ScenarioError::Validation(format!("hamiltonian.fermion_dm: {e}"))
                })?;
                let h = m.h().clone();
                model = Some(m);
                h
            }
            HamiltonianSpec::Generator(GeneratorSpec::Similar { h0, r }) => {
                let s = similar_norm_preserving(h0, r).map_err(|e| match e {
                    crate::Error::InvalidArgument(_) | crate::Error::Dimension(_) => {
                        ScenarioError::Validation(format!("hamiltonian.similar: {e}"))
                    }
                    other => ScenarioError::Numerical(other),
                })?;
                let h = s.h.clone();
                similarity = Some(s);
                h
            }
        };
        if !h.is_square() || h.rows() == 0 {
            return invalid(format!(
                "hamiltonian must be a non-empty square matrix, got {:?}",
                h.shape()
            ));
        }
        let n = h.rows();
        if n > max_dim {
            return invalid(format!(
                "hamiltonian dimension {n} exceeds {MAX_DIM_ENV}={max_dim}"
            ));
        }

        let (psi0, initial_label, input_norm) = match &self.initial_state {
            None => (None, None, None),
            Some(InitialState::Vector(v)) => {
                if v.len() != n {
                    return invalid(format!(
                        "initial_state has length {}, hamiltonian is {n}x{n}",
                        v.len()
                    ));
                }
                if v.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return invalid("initial_state has non-finite entries".into());
                }
                let psi = StateVector::from_column_slice(v);
                let norm = psi.norm();
                if norm == 0.0 {
                    return invalid("initial_state is the zero vector".into());
                }
                (Some(&psi / C64::new(norm, 0.0)), None, Some(norm))
            }
            Some(InitialState::Label(s)) => {
                let label: OccupationLabel = s
                    .parse()
                    .map_err(|e| ScenarioError::Validation(format!("initial_state: {e}")))?;
                if label.n_modes() >= usize::BITS as usize || 1usize << label.n_modes() != n {
                    return invalid(format!(
                        "initial_state label {s:?} has {} modes, which does not match dimension {n}",
                        label.n_modes()
                    ));
                }
                (
                    Some(crate::linalg::basis_vector(n, label.index())),
                    Some(label),
                    Some(1.0),
                )
            }
        };

        let mut observables = Vec::with_capacity(self.observables.len());
        for (k, spec) in self.observables.iter().enumerate() {
            let (name, matrix) = match spec {
                ObservableSpec::Builtin(name) => {
                    let m = match name.as_str() {
                        "identity" => Some(ComplexMatrix::identity(n)),
                        "H" => Some(h.clone()),
                        other => model.as_ref().and_then(|m| m.builtin_observable(other)),
                    };
                    match m {
                        Some(m) => (name.clone(), m),
                        None => {
                            return invalid(format!(
                                "observables[{k}]: unknown builtin {name:?} (N, N1, N2, N3 need a fermion_dm hamiltonian)"
                            ))
                        }
                    }
                }
                ObservableSpec::Named { name, matrix } => {
                    if matrix.shape() != (n, n) {
                        return invalid(format!(
                            "observables[{k}] ({name}) is {:?}, hamiltonian is {n}x{n}",
                            matrix.shape()
                        ));
                    }
                    (name.clone(), matrix.clone())
                }
            };
            if observables
                .iter()
                .any(|(existing, _): &(String, ComplexMatrix)| *existing == name)
            {
                return invalid(format!("observables[{k}]: duplicate name {name:?}"));
            }
            observables.push((name, matrix));
        }

        let mut tasks = self.tasks.clone();
        tasks.sort();
        tasks.dedup();
        let needs_state = tasks
            .iter()
            .any(|t| matches!(t, Task::Trajectory | Task::Classify | Task::FermionDemo));
        if needs_state && psi0.is_none() {
            return invalid(
                "initial_state is required by the trajectory, classify and fermion_demo tasks"
                    .into(),
            );
        }
        if tasks.contains(&Task::FermionDemo) && (model.is_none() || initial_label.is_none()) {
            return invalid(
                "fermion_demo needs a fermion_dm hamiltonian and an occupation-label initial_state"
                    .into(),
            );
        }
        if tasks.contains(&Task::EigenstateCase) && self.eigen_index >= n {
            return invalid(format!(
                "eigen_index {} out of range for dimension {n}",
                self.eigen_index
            ));
        }

        Ok(Prepared {
            h,
            model,
            similarity,
            psi0,
            initial_label,
            input_norm,
            observables,
            grid: self.time.grid(),
            tasks,
        })
    }
}

/// Validated numerical inputs of a scenario.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub h: ComplexMatrix,
    pub model: Option<DmModel>,
    pub similarity: Option<SimilarityConstruction>,
    /// Unit initial state.
    pub psi0: Option<StateVector>,
    pub initial_label: Option<OccupationLabel>,
    /// Norm of the initial state as supplied, before normalization.
    pub input_norm: Option<f64>,
    pub observables: Vec<(String, ComplexMatrix)>,
    pub grid: Vec<f64>,
    /// Requested tasks, deduplicated, in execution order.
    pub tasks: Vec<Task>,
}

/// Reads the dimension cap from the environment.
pub fn max_dim_from_env() -> Result<usize, ScenarioError> {
    match std::env::var(MAX_DIM_ENV) {
        Err(_) => Ok(DEFAULT_MAX_DIM),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| {
                ScenarioError::Validation(format!(
                    "{MAX_DIM_ENV} must be a positive integer, got {v:?}"
                ))
            }),
    }
}
