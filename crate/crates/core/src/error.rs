use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid position: {0}")]
    InvalidPosition(String),
    #[error("not a permutation matrix: {0}")]
    NotPermutationMatrix(String),
    #[error("invalid code family: {0}")]
    InvalidFamily(String),
    #[error("n = {n} is too large for exhaustive enumeration (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error("invalid codebook: {0}")]
    InvalidCodebook(String),
    #[error("invalid channel parameters: {0}")]
    InvalidParams(String),
    #[error("invalid error pattern: {0}")]
    InvalidPattern(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("model file checksum mismatch or truncated file")]
    Checksum,
    #[error("unsupported model file: {0}")]
    Version(String),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}
