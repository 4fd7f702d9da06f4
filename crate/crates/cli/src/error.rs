use serde_json::json;

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameter values (exit 2).
    Usage(String),
    /// The solver could not produce a result (exit 1).
    Solver(String),
    /// Output could not be written (exit 1).
    Io(String),
    /// `oracle-check` found a disagreement (exit 3).
    OracleMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 1,
            CliError::OracleMismatch(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Solver(_) => "solver",
            CliError::Io(_) => "io",
            CliError::OracleMismatch(_) => "oracle-mismatch",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Solver(m)
            | CliError::Io(m)
            | CliError::OracleMismatch(m) => m,
        }
    }

    /// Single-line JSON for stderr.
    pub fn json_line(&self) -> String {
        json!({"error": {"kind": self.kind(), "message": self.message(), "exit_code": self.exit_code()}}).to_string()
    }
}

impl From<modent::Error> for CliError {
    fn from(e: modent::Error) -> Self {
        use modent::Error::*;
        match e {
            InvalidSpec(_)
            | NonFiniteCoupling { .. }
            | InvalidSites { .. }
            | OracleTooLarge { .. }
            | InvalidGrid(_) => CliError::Usage(e.to_string()),
            NonPhysical(_) | NoConvergence(_) => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
