use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("cannot parse game record {input:?}: {reason}")]
    GameFormat { input: String, reason: String },

    #[error("invalid quota {0:?}: expected a rational in [1/2, 1)")]
    InvalidQuota(String),

    #[error("player index {index} out of range for {players} players")]
    PlayerOutOfRange { index: usize, players: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("resource budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {reason}")]
    Federation { path: PathBuf, reason: String },

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
