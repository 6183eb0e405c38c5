use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("Gevrey weight overflow at shell {shell}: exponent {exponent:.3} exceeds 700")]
    GevreyOverflow { shell: usize, exponent: f64 },

    #[error("blow-up at t = {t}: {reason} (shell {shell})")]
    BlowUp { t: f64, shell: usize, reason: String },

    #[error("unstable time step: dt = {dt} exceeds CFL bound {bound} by more than 10x")]
    Stability { dt: f64, bound: f64 },

    #[error("degenerate tangent set: normalizer {value:e} of direction {index} below 1e-300")]
    DegenerateTangent { index: usize, value: f64 },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("ill-posed regime: {0}")]
    IllPosed(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("observer failed at t = {t}: {message}")]
    Observer { t: f64, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for failures caused by the numerics rather than by inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BlowUp { .. } | Error::Stability { .. } | Error::DegenerateTangent { .. }
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
