use thiserror::Error;

/// Errors surfaced by data generation, fitting and selection routines.
#[derive(Error, Debug, Clone)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(
        "matrix is not positive definite: Cholesky pivot {index} is non-positive \
         ({value:.6e}), so the smallest eigenvalue is negative or zero"
    )]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("rank-deficient design: columns {columns:?} are collinear at pivot tolerance {tol:.1e}")]
    RankDeficient { columns: Vec<usize>, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
    pub fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
