use std::fmt;

use sanitizer_core::Error;

/// Pipeline step an error came from, shown as a prefix in messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Input,
    Keywords,
    Safewords,
    Spotting,
    TemplateUpdate,
    Substitution,
    Conversion,
    Output,
    Log,
    Restore,
    Bench,
    Praka,
    Attack,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::Input => "input",
            Stage::Keywords => "keywords",
            Stage::Safewords => "safewords",
            Stage::Spotting => "spotting",
            Stage::TemplateUpdate => "template-update",
            Stage::Substitution => "substitution",
            Stage::Conversion => "conversion",
            Stage::Output => "output",
            Stage::Log => "log",
            Stage::Restore => "restore",
            Stage::Bench => "bench",
            Stage::Praka => "praka",
            Stage::Attack => "attack",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T, E: Into<Error>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError {
            stage,
            source: e.into(),
        })
    }
}
