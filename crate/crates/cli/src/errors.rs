use std::fmt;

/// CLI failure categories, mapped onto process exit codes:
/// 2 usage, 3 I/O, 4 numerical degeneracy.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numeric(sepals::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
            CliError::Numeric(err) => write!(f, "{err}"),
        }
    }
}

impl From<sepals::Error> for CliError {
    fn from(err: sepals::Error) -> Self {
        use sepals::Error::*;
        match err {
            // Bad arguments reaching the library surface are usage errors.
            Domain(_) | InvalidInput(_) | BadThreshold(_) => CliError::Usage(err.to_string()),
            DegenerateDirection(_) | OverShrunk(_) | NonPositiveTail(_)
            | DegenerateSubsample(_) => CliError::Numeric(err),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

impl CliError {
    /// Prints the error (machine-readable JSON on stderr for numerical
    /// degeneracies) and returns the exit code.
    pub fn report(&self) -> i32 {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                2
            }
            CliError::Io(msg) => {
                eprintln!("error: {msg}");
                3
            }
            CliError::Numeric(err) => {
                let payload = serde_json::json!({
                    "error": err.name(),
                    "message": err.to_string(),
                });
                eprintln!("{payload}");
                4
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
