use std::fmt;
use std::path::Path;

use spillover::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub stage: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            stage: None,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Data,
            stage: None,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn in_stage(mut self, stage: &str) -> Self {
        self.stage.get_or_insert_with(|| stage.to_string());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = if e.is_numerical() {
            ErrorKind::Numerical
        } else {
            ErrorKind::Data
        };
        Self {
            kind,
            stage: None,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.stage {
            Some(stage) => write!(f, "stage {stage}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Tags a core error with the pipeline stage it came from.
pub trait StageContext<T> {
    fn stage(self, stage: &str) -> Result<T, CliError>;
}

impl<T, E: Into<CliError>> StageContext<T> for Result<T, E> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| e.into().in_stage(stage))
    }
}
