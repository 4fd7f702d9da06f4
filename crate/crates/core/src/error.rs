use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),

    #[error("coupling {index} is not finite ({value})")]
    NonFiniteCoupling { index: usize, value: f64 },

    #[error("site pair ({i}, {j}) invalid for a chain of {sites} sites")]
    InvalidSites { i: usize, j: usize, sites: usize },

    #[error("non-physical two-site state: {0}")]
    NonPhysical(String),

    #[error("chain of {sites} sites exceeds the exact-diagonalization cap of {cap}")]
    OracleTooLarge { sites: usize, cap: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("bidiagonal SVD failed to converge after {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
