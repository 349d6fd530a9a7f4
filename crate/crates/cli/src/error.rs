use std::path::PathBuf;

use partmech::dist::DistError;
use partmech::generators::GenError;
use partmech::mechanism::MechanismError;
use partmech::ptas::PtasError;
use partmech::rational::ParseRationalError;
use partmech::SolveError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed JSON: {msg}", path.display())]
    Json { path: PathBuf, msg: String },
    #[error("bad rational: {0}")]
    Rational(#[from] ParseRationalError),
    #[error("invalid instance: {0}")]
    Instance(DistError),
    #[error("mechanism does not fit the instance: {0}")]
    Structure(MechanismError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    TooLarge(String),
    #[error(
        "candidate budget exhausted after {0} candidates; the reported mechanism is the best found"
    )]
    BudgetExhausted(u64),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Json { .. }
            | CliError::Rational(_)
            | CliError::Instance(_)
            | CliError::Structure(_) => EXIT_INPUT,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::TooLarge(_) | CliError::BudgetExhausted(_) => EXIT_BUDGET,
        }
    }

    /// Short tag used as a per-row marker in comparison tables.
    pub fn marker(&self) -> &'static str {
        match self {
            CliError::Io { .. } | CliError::Json { .. } => "ERR:file",
            CliError::Rational(_) | CliError::Instance(_) => "ERR:parse",
            CliError::Structure(_) => "ERR:structure",
            CliError::Usage(_) => "ERR:usage",
            CliError::TooLarge(_) => "ERR:size",
            CliError::BudgetExhausted(_) => "ERR:budget",
        }
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::SupportExplosion { .. } => CliError::TooLarge(e.to_string()),
            other => CliError::Instance(other),
        }
    }
}

impl From<MechanismError> for CliError {
    fn from(e: MechanismError) -> Self {
        match e {
            MechanismError::InstanceTooLarge { .. } => CliError::TooLarge(e.to_string()),
            MechanismError::Dist(d) => d.into(),
            other => CliError::Structure(other),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::OracleSizeExceeded { .. } => CliError::TooLarge(e.to_string()),
            SolveError::InvalidConfig(m) => CliError::Usage(m),
            SolveError::Dist(d) => d.into(),
            SolveError::Mechanism(m) => m.into(),
        }
    }
}

impl From<PtasError> for CliError {
    fn from(e: PtasError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Usage(e.to_string())
    }
}
