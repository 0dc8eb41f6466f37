use thiserror::Error;

/// Unified error type for the engine.
///
/// Input-shaped problems (bad parameters, bad intervals, syntax errors,
/// inadmissible variations) are distinct from evaluation-time problems
/// (domain violations, non-finite results) so callers can map them to
/// different exit paths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HahnError {
    /// Parameter validation failure (q outside (0,1), q too close to 1, negative omega, non-finite input).
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    /// Interval validation failure (a >= b, non-finite endpoint, zero depth).
    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    /// Syntax error in an expression or table specification. `offset` is a byte offset into the source.
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Identifier outside the declared variable set and the built-in constants.
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    /// Evaluation hit a domain violation: division by zero, sqrt of a negative,
    /// log of a non-positive value, or an unbound variable.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation produced NaN or an infinity.
    #[error("non-finite result: {0}")]
    NonFinite(String),

    /// A variation violates the admissibility constraint eta(a) = eta(b) = 0.
    #[error("variation not admissible: {0}")]
    NotAdmissible(String),
}

impl HahnError {
    /// True for errors caused by malformed input rather than by evaluation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            HahnError::InvalidParams(_)
                | HahnError::InvalidInterval(_)
                | HahnError::Parse { .. }
                | HahnError::UnknownIdentifier { .. }
                | HahnError::NotAdmissible(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, HahnError>;
