use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] kpzlab::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
    #[error("{failed} of {total} verification rows failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

impl CliError {
    /// 2: a check failed; 3: the configuration is invalid; 4: anything else.
    pub fn exit_code(&self) -> i32 {
        use kpzlab::Error as E;
        match self {
            CliError::ChecksFailed { .. } => 2,
            CliError::Config(_) => 3,
            CliError::Core(
                E::InvalidParameter(_)
                | E::InvalidCutoff(_)
                | E::GammaOutOfRange { .. }
                | E::DeltaOutOfRange { .. }
                | E::OutOfDomain { .. }
                | E::CoincidentPoints
                | E::DegenerateAngle(_)
                | E::ResolutionTooCoarse { .. }
                | E::BoundaryTooClose { .. },
            ) => 3,
            _ => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid-config",
            CliError::Core(_) => "module-error",
            CliError::Io(_) => "io-error",
            CliError::Image(_) => "image-error",
            CliError::ChecksFailed { .. } => "check-failure",
        }
    }

    /// One-line JSON for machine consumers.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("plain struct serializes")
    }
}
