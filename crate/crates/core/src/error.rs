use thiserror::Error;

/// Errors shared across the geometry stack.
#[derive(Debug, Error)]
pub enum GeomError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("degenerate input: {0}")]
    Degeneracy(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// A parameter combination violates a named feasibility inequality.
    #[error("infeasible parameters: violated `{inequality}`{}", detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default())]
    Infeasible {
        inequality: String,
        detail: Option<String>,
    },

    /// A deformation parameter set fails an admissibility gate.
    #[error("admissibility violation: `{inequality}`{}", detail.as_deref().map(|d| format!(" ({d})")).unwrap_or_default())]
    Admissibility {
        inequality: String,
        detail: Option<String>,
    },

    /// Construction completed but a certificate margin was non-positive.
    #[error("construction failed: {0}")]
    Construction(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GeomError {
    pub fn infeasible(inequality: impl Into<String>, detail: impl Into<String>) -> Self {
        GeomError::Infeasible {
            inequality: inequality.into(),
            detail: Some(detail.into()),
        }
    }

    pub fn admissibility(inequality: impl Into<String>, detail: impl Into<String>) -> Self {
        GeomError::Admissibility {
            inequality: inequality.into(),
            detail: Some(detail.into()),
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
