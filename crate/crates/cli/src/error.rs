use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Core(#[from] singscat_core::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    /// Outputs were written, but the trace never settled.
    #[error("no plateau: {0}")]
    NotConverged(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use singscat_core::Error;

    #[test]
    fn exit_codes_follow_the_failure_class() {
        assert_eq!(CliError::validation("x").exit_code(), EXIT_VALIDATION);
        assert_eq!(
            CliError::from(Error::SingularAmplitude { k: 1.0 }).exit_code(),
            EXIT_NUMERICAL
        );
        let breakdown = Error::IntegratorBreakdown {
            step: 3,
            site: 7,
            reason: "nan".into(),
        };
        assert_eq!(CliError::from(breakdown).exit_code(), EXIT_NUMERICAL);
        let bad = Error::Resolution("k·dx too large".into());
        assert_eq!(CliError::from(bad).exit_code(), EXIT_VALIDATION);
        assert_eq!(
            CliError::NotConverged(String::new()).exit_code(),
            EXIT_NOT_CONVERGED
        );
    }
}
