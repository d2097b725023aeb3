use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("backend error: {0}")]
    Backend(String),
    #[error("failed to write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Input(_) => 3,
            Self::Backend(_) => 4,
            Self::Output { .. } => 1,
        }
    }

    pub fn input(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::Input(format!("{}: {err}", path.display()))
    }
}

impl From<docspan_core::translate::TranslateError> for CliError {
    fn from(e: docspan_core::translate::TranslateError) -> Self {
        use docspan_core::translate::TranslateError as T;
        match e {
            T::InvalidSpec { .. } => Self::Config(e.to_string()),
            other => Self::Backend(other.to_string()),
        }
    }
}

impl From<docspan_core::schedule::ScheduleError> for CliError {
    fn from(e: docspan_core::schedule::ScheduleError) -> Self {
        use docspan_core::schedule::ScheduleError as S;
        match e {
            S::InvalidLimits | S::InvalidLimit => Self::Config(e.to_string()),
            S::Translate(t) => t.into(),
            S::BackupFailed { .. } => Self::Backend(e.to_string()),
        }
    }
}

impl From<docspan_core::strategy::StrategyError> for CliError {
    fn from(e: docspan_core::strategy::StrategyError) -> Self {
        use docspan_core::strategy::StrategyError as S;
        match e {
            S::InvalidLabel(_) | S::InvalidRules => Self::Config(e.to_string()),
            S::Translate(t) => t.into(),
            S::NoValidCandidate { .. } => Self::Backend(e.to_string()),
        }
    }
}
