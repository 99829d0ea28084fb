use thiserror::Error;

/// Errors raised by the analysis engines and the NLS driver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("invalid tableau `{id}`: {}", violations.join("; "))]
    InvalidTableau { id: String, violations: Vec<String> },

    #[error("singular stage solve at stage {stage}")]
    SingularStageSolve { stage: usize },

    #[error("iteration count exceeds processors (K = {k}, Np = {np})")]
    IterationsExceedProcessors { k: usize, np: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("power iteration stalled after {sweeps} sweeps")]
    PowerIterationStalled { sweeps: usize },

    #[error("degenerate free model: alpha = 0 and mean iteration count = 0")]
    DegenerateCostModel,

    #[error("blow-up detected at step {step}{}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    BlowUp { step: usize, context: Option<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical failures (blow-up, stalled iterations) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BlowUp { .. } | Error::PowerIterationStalled { .. } | Error::SingularStageSolve { .. }
        )
    }

    pub(crate) fn with_context(self, ctx: impl Into<String>) -> Self {
        match self {
            Error::BlowUp { step, context } => {
                let ctx = ctx.into();
                let context = Some(match context {
                    Some(inner) => format!("{ctx}, {inner}"),
                    None => ctx,
                });
                Error::BlowUp { step, context }
            }
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
