use thiserror::Error;

/// Errors raised by the model, the simulator and the optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A parameter is outside its admissible domain.
    #[error("parameter `{name}` out of domain: {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The case sums and the printed closed form disagree beyond tolerance.
    /// `case_sum` is the authoritative value.
    #[error(
        "{metric}: case sum {case_sum} disagrees with closed form {closed_form} \
         (relative gap {relative_gap:e})"
    )]
    ClosedFormMismatch {
        metric: &'static str,
        case_sum: f64,
        closed_form: f64,
        relative_gap: f64,
    },

    /// The objective evaluated to a non-finite value.
    #[error("objective is not finite at eta_o = {eta_o} (value {value})")]
    NonFiniteObjective { eta_o: f64, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl ModelError {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        ModelError::Domain {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
