use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("output longer than input ({output} > {input})")]
    OutputLongerThanInput { input: usize, output: usize },

    #[error("length {n} outside supported range 1..={cap}")]
    Size { n: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("operation not supported for the {0} channel model")]
    UnsupportedModel(&'static str),

    #[error("kernel validation failed: {0}")]
    Validation(String),

    #[error("malformed kernel file: {0}")]
    Format(String),

    #[error("kernel file checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    Checksum { stored: u32, computed: u32 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
