use std::fmt;
use std::path::Path;

/// Failure classes, each with its own exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Input,
    Detector,
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Usage => 1,
            Kind::Input => 2,
            Kind::Detector => 3,
            Kind::Internal => 4,
        }
    }
}

/// An error tagged with the pipeline stage it came from.
#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub stage: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, stage: &'static str, message: impl fmt::Display) -> Self {
        Self {
            kind,
            stage,
            message: message.to_string(),
        }
    }

    pub fn usage(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(Kind::Usage, stage, message)
    }

    pub fn input(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(Kind::Input, stage, message)
    }

    pub fn detector(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(Kind::Detector, stage, message)
    }

    pub fn internal(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(Kind::Internal, stage, message)
    }

    pub fn read(stage: &'static str, path: &Path, e: std::io::Error) -> Self {
        Self::input(stage, format!("cannot read {}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;
