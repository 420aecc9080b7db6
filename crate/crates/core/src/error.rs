use thiserror::Error;

use crate::dates::{DateError, NumberError};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("act {act_id}: character U+{code:04X} cannot be represented in XML")]
    Unrepresentable { act_id: String, code: u32 },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("model: {0}")]
    Model(String),
    #[error("config: {0}")]
    Config(String),
    #[error("evaluation input: {0}")]
    Eval(String),
    #[error(transparent)]
    Number(#[from] NumberError),
    #[error(transparent)]
    Date(#[from] DateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Builds a validation error from a violation list, keeping at most the first 20.
    pub fn validation<I, S>(violations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        Error::Validation(violations.into_iter().take(20).map(|v| v.to_string()).collect())
    }
}
