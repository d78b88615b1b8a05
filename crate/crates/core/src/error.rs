use thiserror::Error;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension overflow: {0}")]
    DimensionOverflow(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (defect {defect:e}, allowed {allowed:e})")]
    NotHermitian { defect: f64, allowed: f64 },

    #[error("eigenvalue {eigenvalue:e} is below the positivity floor {floor:e}")]
    Positivity { eigenvalue: f64, floor: f64 },

    #[error("Jacobi eigensolver did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    #[error("trace {trace} deviates from 1 by more than the allowed tolerance")]
    Trace { trace: f64 },

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("invalid system shape: {0}")]
    InvalidShape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            LabError::Positivity { .. }
                | LabError::NoConvergence { .. }
                | LabError::NotHermitian { .. }
                | LabError::NonFinite { .. }
        )
    }
}
