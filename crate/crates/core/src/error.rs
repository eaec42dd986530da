use thiserror::Error;

/// Errors surfaced by the localization pipeline and its tooling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no pass above {mask_deg:.1} deg elevation (peak {peak_deg:.2} deg)")]
    NoPassFound { peak_deg: f64, mask_deg: f64 },

    #[error("insufficient samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("no beacon detected: {qualifying}/{total} frames above threshold")]
    NoBeaconDetected { qualifying: usize, total: usize },

    #[error("phase pair infeasible for this lobe (arccos argument {0})")]
    InvalidElevation(f64),

    #[error("gravimetric objective is flat across the height grid (relative spread {0:.3e})")]
    FlatObjective(f64),

    #[error("no candidate survived filtering ({evaluated} evaluated)")]
    NoSurvivingCandidate { evaluated: usize },

    #[error("insufficient overlap between truth and observables ({0} common samples)")]
    InsufficientOverlap(usize),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable category, used by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::NoPassFound { .. } => "no-pass-found",
            Error::InsufficientSamples { .. } => "insufficient-samples",
            Error::NoBeaconDetected { .. } => "no-beacon-detected",
            Error::InvalidElevation(_) => "invalid-elevation",
            Error::FlatObjective(_) => "flat-objective",
            Error::NoSurvivingCandidate { .. } => "no-surviving-candidate",
            Error::InsufficientOverlap(_) => "insufficient-overlap",
            Error::Config { .. } => "config",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 2,
            Error::Config { .. } => 3,
            Error::Parse { .. } => 4,
            Error::Io(_) => 5,
            Error::NoPassFound { .. } => 10,
            Error::InsufficientSamples { .. } => 11,
            Error::NoBeaconDetected { .. } => 12,
            Error::InvalidElevation(_) => 13,
            Error::FlatObjective(_) => 14,
            Error::NoSurvivingCandidate { .. } => 15,
            Error::InsufficientOverlap(_) => 16,
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
