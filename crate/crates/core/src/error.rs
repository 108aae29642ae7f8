use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is numerically singular (reciprocal condition estimate {rcond:e})")]
    Singular { rcond: f64 },

    #[error("eigenvalue iteration failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("size limit exceeded: n = {n}, maximum supported is {max}")]
    SizeLimit { n: usize, max: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("block count is ambiguous across reseeded draws: candidates {first} and {second}")]
    Ambiguous { first: usize, second: usize },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
