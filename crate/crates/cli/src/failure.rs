use std::fmt;
use std::process::ExitCode;

/// Classified errors mapped to exit codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    /// Exit 2.
    Config(String),
    /// Exit 3.
    Data(String),
    /// Exit 4: an upstream stage has not run or its artifacts are stale.
    Dependency(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Config(_) => 2,
            Failure::Data(_) => 3,
            Failure::Dependency(_) => 4,
        })
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Dependency(m) => write!(f, "stage dependency error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}
