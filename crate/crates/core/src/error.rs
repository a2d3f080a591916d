use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not unitary: ||U^H U - I||_F = {deviation:.3e} exceeds {bound:.3e}")]
    NotUnitary { deviation: f64, bound: f64 },

    #[error("SVD failed to converge on frontal slice {slice}")]
    SvdNoConvergence { slice: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical instability: {0}")]
    Numeric(String),

    #[error("iteration {iteration} produced non-finite values")]
    Divergence { iteration: usize },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
