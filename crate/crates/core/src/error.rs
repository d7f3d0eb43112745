use thiserror::Error;

use crate::copulas::Family;
use crate::genfn::GeneratorKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("generator kind {found} not accepted here (expected {expected})")]
    KindMismatch {
        expected: &'static str,
        found: GeneratorKind,
    },

    #[error("{what} is undefined at {at}")]
    Domain { what: &'static str, at: f64 },

    #[error("degenerate shock model: {0}")]
    DegenerateModel(String),

    #[error("family mismatch: expected {expected}, found {found}")]
    FamilyMismatch { expected: Family, found: Family },

    #[error("invalid shock model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("p-box bounds out of order at x={at}: lower={lower} > upper={upper}")]
    PBoxOrder { at: f64, lower: f64, upper: f64 },

    #[error("operation needs a precise model, but component {0} is a proper p-box")]
    ImpreciseModel(usize),

    #[error("support limit exceeded: {0}")]
    SupportLimit(String),

    #[error("inverse-transform sampling is not available for {0} distributions")]
    UnsupportedSampling(&'static str),

    #[error("invalid bound level {bound} for family {family}")]
    InvalidBound { bound: String, family: Family },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
