use thiserror::Error;

/// Errors raised by the manifold kernels, curves and optimizer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("matrix function domain violated: {0}")]
    Domain(String),

    #[error("{0} did not converge after {1} iterations")]
    Convergence(&'static str, usize),

    #[error("point is not feasible: residual {residual:e} exceeds {tol:e}")]
    NotFeasible { residual: f64, tol: f64 },

    #[error("matrix is not a tangent vector: residual {residual:e} exceeds {tol:e}")]
    NotTangent { residual: f64, tol: f64 },

    #[error("tangent vector is not horizontal: residual {residual:e} exceeds {tol:e}")]
    NotHorizontal { residual: f64, tol: f64 },

    #[error("structure check failed ({what}): residual {residual:e} exceeds {tol:e}")]
    Structure {
        what: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("tangent vectors live at different base points")]
    BaseMismatch,

    #[error("points are outside the domain of the inverse map: {0}")]
    OutOfDomain(&'static str),

    #[error("every line-search trial hit a singular retraction at iteration {0}")]
    StepFailure(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Run { context: String, source: Box<Error> },
}

impl Error {
    /// True for failures caused by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Run { source, .. } => source.is_numerical(),
            other => !matches!(
                other,
                Error::Dimension(_) | Error::Config(_) | Error::BaseMismatch
            ),
        }
    }

    pub(crate) fn in_context(self, context: impl Into<String>) -> Self {
        Error::Run {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
