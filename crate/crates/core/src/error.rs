use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A state vector outside the domain of the saturation function.
    #[error("state outside model domain: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("jacobian undefined at a point where the saturation function is not differentiable: {0}")]
    Nondifferentiable(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Scalar root could not be bracketed or the iteration failed to converge.
    #[error("root solver failed on bracket [{lo:e}, {hi:e}]: {reason}")]
    Solver { lo: f64, hi: f64, reason: String },

    #[error("integration aborted at step {step}: non-finite value in component {component}")]
    NonFinite { step: usize, component: usize },

    #[error("positivity violated at step {step}: component {component} = {value:e}")]
    Positivity {
        step: usize,
        component: usize,
        value: f64,
    },

    #[error("decay fit failed: {0}")]
    Fit(String),

    #[error("time {t} is beyond the log-domain range of the closed form (alpha*t = {scaled:e}); use the asymptotic expansion")]
    HorizonTooLarge { t: f64, scaled: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("configuration invalid:\n{}", format_config_errors(.0))]
    Config(Vec<ConfigError>),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_config_errors(errors: &[ConfigError]) -> String {
    errors
        .iter()
        .map(|e| format!("  {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of a numerical routine, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Solver { .. }
                | Error::NonFinite { .. }
                | Error::Positivity { .. }
                | Error::Fit(_)
                | Error::HorizonTooLarge { .. }
        )
    }
}
