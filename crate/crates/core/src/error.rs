use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Every kernel weight vanished at an evaluation point; the bandwidth is too
    /// small for the design.
    #[error("zero kernel mass at x = {x}")]
    ZeroMass { x: f64 },

    #[error("zero kernel mass in cross-validation fold {fold} at x = {x}")]
    ZeroMassInFold { fold: usize, x: f64 },

    #[error("index {0} is not in the constraint set")]
    NotAConstraint(usize),

    #[error("response has zero variance and cannot be standardized")]
    DegenerateResponse,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no constrained points to evaluate")]
    EmptyConstraints,

    #[error("evaluation grid is not uniformly spaced")]
    NonUniformGrid,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("track has zero total chord length")]
    DegenerateTrack,

    #[error("bad simulation preset: {0}")]
    BadPreset(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("every tuning cell was infeasible")]
    NoFeasibleCell,

    #[error("parse error on line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("non-finite value on line {line}")]
    NonFiniteValue { line: u64 },

    #[error("input contains no data rows")]
    NoRows,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short, stable name of the error variant, used by the CLI when reporting
    /// failures.
    pub fn class(&self) -> &'static str {
        match self {
            Error::ZeroMass { .. } | Error::ZeroMassInFold { .. } => "ZeroMass",
            Error::NotAConstraint(_) => "NotAConstraint",
            Error::DegenerateResponse => "DegenerateResponse",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptyConstraints => "EmptyConstraints",
            Error::NonUniformGrid => "NonUniformGrid",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::DegenerateTrack => "DegenerateTrack",
            Error::BadPreset(_) => "BadPreset",
            Error::InvalidDataset(_) => "InvalidDataset",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::NoFeasibleCell => "NoFeasibleCell",
            Error::Parse { .. } => "ParseError",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::NoRows => "NoRows",
            Error::Io(_) => "IoError",
            Error::Json(_) => "IoError",
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::NonFiniteValue { .. } | Error::NoRows => 3,
            Error::Io(_) | Error::Json(_) => 4,
            Error::InvalidConfig(_) | Error::BadPreset(_) => 5,
            _ => 2,
        }
    }
}
