use thiserror::Error;

/// Errors raised by the algebra, bundle, algebroid and dynamics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("point lies outside the domain box")]
    OutsideDomain,

    #[error("point {0} lies in no cell")]
    NoCell(String),

    #[error("cells overlap at {point} ({count} cells contain it)")]
    OverlappingCells { point: String, count: usize },

    #[error("expected a univariate input, found {0} variables")]
    NotUnivariate(usize),

    #[error("domain mismatch between bundles")]
    DomainMismatch,

    #[error("anchor is not involutive: [rho(e{i}), rho(e{j})] = {field} is not in the anchored module")]
    NotInvolutive { i: usize, j: usize, field: String },

    #[error("rank of the foliation is not constant along the path ({0})")]
    RankNotConstant(String),

    #[error("trajectory left the domain box at t = {0}")]
    LeftDomain(f64),

    #[error("non-finite value encountered at t = {0}")]
    NonFinite(f64),

    #[error("unsupported input shape: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
