//! Crate-wide error type and exit-code mapping.

/// Error type shared by all modules.
///
/// Divergent integrals are *errors* only where a finite value was required;
/// the weight-class constants report divergence as `+inf` with a witness
/// instead of returning `Err`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dyadic scale {j} outside the supported window [{min}, {max}]")]
    ScaleOutOfRange { j: i64, min: i32, max: i32 },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("quadrature tolerance not met: requested {requested:e}, achieved {achieved:e}")]
    ToleranceNotMet { requested: f64, achieved: f64 },

    #[error("scale window too small: {0}")]
    WindowTooSmall(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI contract:
    /// 2 config error, 3 numeric/domain error. Check failures exit 4 but are
    /// not represented as `Error` values.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
