use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Grid or parameter set that violates a construction invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two operands live on different grids or have incompatible lengths.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Translation or shift that does not land on grid nodes.
    #[error("off-grid shift: {0}")]
    OffGrid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical postcondition failed (non-Hermitian matrix, annihilated state, ...).
    #[error("numerical contract violated: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
