use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A reflection/transmission amplitude has a pole at this wavenumber.
    #[error("scattering amplitudes are singular at k = {k}")]
    SingularAmplitude { k: f64 },

    #[error("a hard wall has no transfer matrix; use the wall-closure determinant instead")]
    UnsupportedAsMatrix,

    #[error("transfer matrices evaluated at different wavenumbers ({outer} vs {inner})")]
    IncompatibleWavenumber { outer: f64, inner: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("x = {x} lies outside the wave's domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("resolution guard violated: {0}")]
    Resolution(String),

    #[error("integrator breakdown at step {step}, site {site}: {reason}")]
    IntegratorBreakdown {
        step: usize,
        site: usize,
        reason: String,
    },

    #[error("state has zero norm")]
    ZeroNorm,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularAmplitude { .. }
                | Error::IntegratorBreakdown { .. }
                | Error::ZeroNorm
                | Error::IncompatibleWavenumber { .. }
        )
    }
}
