use thiserror::Error;

/// Errors raised by the numerical kernels and the model modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("numeric range exceeded: {0}")]
    NumericRange(String),

    #[error("eigen iteration did not converge (worst residual {residual:e}): {detail}")]
    NoConvergence { residual: f64, detail: String },

    #[error(
        "degenerate spectrum: eigenvalues #{first} ({first_value}) and #{second} ({second_value}) \
         are closer than {threshold:e}"
    )]
    DegenerateSpectrum {
        first: usize,
        second: usize,
        first_value: String,
        second_value: String,
        threshold: f64,
    },

    #[error("series truncation needs more than {cap} terms (tail bound {tail_bound:e} still above {tol:e})")]
    Truncation {
        cap: usize,
        tail_bound: f64,
        tol: f64,
    },

    #[error("state is not normalized: norm {norm} (tolerance {tol:e})")]
    NotNormalized { norm: f64, tol: f64 },

    #[error("integration unstable: deviation {deviation:e} exceeds {limit}; increase substeps (currently {substeps})")]
    Unstable {
        deviation: f64,
        limit: f64,
        substeps: usize,
    },

    #[error("operator is not a certified gamma-symmetry: residual {residual:e} > {tol:e}")]
    NotSymmetry { residual: f64, tol: f64 },

    #[error(
        "weak-integral premise violated: mean-derivative residual {weak_residual:e} > {tol:e} \
         (necessary-condition mismatch {mismatch:e})"
    )]
    PremiseViolated {
        weak_residual: f64,
        tol: f64,
        mismatch: f64,
    },

    #[error("no closed form available for initial state {0}")]
    ClosedFormUnavailable(String),

    #[error("matrix is singular or numerically singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("size limit exceeded: {entries} entries requested, maximum is {max}")]
    SizeLimit { entries: u128, max: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
