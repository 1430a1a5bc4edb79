use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaborError {
    #[error("degenerate window")]
    DegenerateWindow,
    #[error("not a frame")]
    NotAFrame,
    #[error("decomposition requires Parseval frame")]
    NotParseval,
    #[error("coefficients not identifiable")]
    NotRieszSequence,
    #[error("equalizer matrix singular")]
    SingularEqualizer,
    #[error("diagonal equalizer undefined")]
    DiagonalUndefined,
    #[error("tolerance unreachable at this L")]
    ToleranceUnreachable,
    #[error("{0}")]
    InvalidLattice(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, GaborError>;
