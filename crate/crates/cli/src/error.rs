use std::fmt;

use fracdyn::error::FracError;

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    /// A check ran and failed (exit 1).
    Verification(String),
    /// Bad flags, config, CSV or polynomial text (exit 2).
    Input(String),
    /// Numerical or I/O failure while running (exit 3).
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Prefixes the message, keeping the class.
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Verification(m) => CliError::Verification(format!("{what}: {m}")),
            CliError::Input(m) => CliError::Input(format!("{what}: {m}")),
            CliError::Runtime(m) => CliError::Runtime(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<FracError> for CliError {
    fn from(e: FracError) -> Self {
        use FracError::*;
        let msg = e.to_string();
        match e {
            InvalidOrder(_) | IntegerOrder(_) | TooFewPoints(..) | InvalidGrid(_) | AxisOutOfRange(..) | NegativeExponent { .. }
            | PowerRulePole { .. } | MissingVariable(_) | NotOnLattice { .. } | Parse { .. } | Unsupported(_) | InvalidSetup(_)
            | Dimension { .. } | TimeDependentBase | Regularity(_) => CliError::Input(msg),
            _ => CliError::Runtime(msg),
        }
    }
}

pub const BROKEN_PIPE: &str = "broken pipe";

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return CliError::Runtime(BROKEN_PIPE.into());
        }
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => io.into(),
            other => CliError::Runtime(format!("csv error: {other:?}")),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        match e.io_error_kind() {
            Some(kind) => std::io::Error::from(kind).into(),
            None => CliError::Runtime(format!("json error: {e}")),
        }
    }
}
