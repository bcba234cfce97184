use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |m - m^H| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace {trace} exceeds 1")]
    TraceExceeded { trace: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("{}U >= 1/2 (U = {u}); the overlap bounds are invalid in this regime", state_prefix(*.state))]
    DefectDomain { state: Option<usize>, u: f64 },

    #[error("invalid input `{field}`: {reason}")]
    InvalidInput { field: &'static str, reason: String },

    #[error("eigenstate overlap {s} is numerically 1; the two-dimensional subspace is degenerate")]
    DegenerateSubspace { s: f64 },

    #[error("unsupported polygon side count {0} (expected 4 or 8)")]
    UnsupportedSides(usize),

    #[error("exact mode requested but the probe carries no exact subspace data")]
    MissingExactData,

    #[error("measured data are inconsistent with any state: every region is infeasible")]
    InconsistentData,

    #[error("solver failed in every region: {0}")]
    SolverFailure(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn state_prefix(state: Option<usize>) -> String {
    match state {
        Some(j) => format!("state{j}: "),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
