//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{context}: ambient dimension mismatch ({left} vs {right})")]
    AmbientMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{context}: shape mismatch ({}x{} vs {}x{})", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("bilinear form is singular")]
    SingularForm,

    #[error("matrix is not symmetric at entry ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("subspace inclusion failure: claimed subspace is not contained in the ambient one")]
    NotIncluded,

    #[error("operator is not nilpotent (index exceeds dimension)")]
    NotNilpotent,

    #[error("Poincare pairing block at degree {0} is degenerate")]
    SingularPairing(usize),

    #[error("subspace is not stable under the Weil operator")]
    NotWeilStable,

    #[error("package is not semismall (defect r = {0})")]
    NotSemismall(i64),

    #[error("invalid package: {0}")]
    InvalidPackage(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
