//! Command implementations behind the `toric-sde` binary. Each command takes
//! parsed input and returns an [`Outcome`]: the document to print and the
//! process status.

pub mod census;
pub mod classify;
pub mod document;
pub mod plot;
pub mod verify;

use serde::Serialize;

pub use census::{census, CensusBounds, CensusReport};
pub use classify::{classify, convert, ClassifyReport};
pub use document::Document;
pub use plot::boundary_plot;
pub use verify::{verify, Tolerances, VerifyOptions, VerifyReport};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass = 0,
    ToleranceFailure = 1,
    ParseError = 2,
    InvalidData = 3,
    Inadmissible = 4,
    Inconsistent = 5,
}

impl Status {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// The more severe of two statuses (inconsistency dominates).
    pub fn worst(self, other: Status) -> Status {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error("inadmissible data: {0}")]
    Inadmissible(String),
    #[error(transparent)]
    Core(#[from] toric_sde::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn status(&self) -> Status {
        use toric_sde::Error as E;
        match self {
            CliError::Parse(_) | CliError::Io(_) => Status::ParseError,
            CliError::Invalid(_) => Status::InvalidData,
            CliError::Inadmissible(_) => Status::Inadmissible,
            CliError::Core(e) => match e {
                E::Inconsistent(_) => Status::Inconsistent,
                E::OutsideAdmissible(_) => Status::Inadmissible,
                E::Quadrature(_) | E::SingularMetric(_) => Status::ToleranceFailure,
                _ => Status::InvalidData,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// What a command prints and how the process exits. `notes` go to stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    pub body: String,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn json<T: Serialize>(status: Status, value: &T) -> CliResult<Self> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| CliError::Parse(e.to_string()))?;
        body.push('\n');
        Ok(Outcome { status, body, notes: Vec::new() })
    }
}
