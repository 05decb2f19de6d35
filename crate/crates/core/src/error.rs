use thiserror::Error;

use crate::expr::{BindingError, EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Binding(#[from] BindingError),
    #[error("invalid interval [{a}, {b}]: need 0 < a < b, both finite")]
    InvalidInterval { a: f64, b: f64 },
    #[error("invalid exponent p = {0}: need finite p with |p| >= 1e-8")]
    InvalidP(f64),
    #[error("invalid fractional order alpha = {0}: need alpha > 0")]
    InvalidOrder(f64),
    #[error("invalid quadrature config: {0}")]
    InvalidQuad(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("point {x} lies outside [{a}, {b}]")]
    OutsideInterval { x: f64, a: f64, b: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("gamma function undefined or overflowing at {0}")]
    GammaDomain(f64),
    #[error("weight is negative at x = {x} (w = {value})")]
    NegativeWeight { x: f64, value: f64 },
    #[error("weight is not p-symmetric: relative asymmetry {asymmetry:e} at x = {x}")]
    AsymmetricWeight { x: f64, asymmetry: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Short machine-readable category, used in report envelopes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Eval(_) => "evaluation",
            Error::Binding(_) => "binding",
            Error::InvalidInterval { .. }
            | Error::InvalidP(_)
            | Error::InvalidOrder(_)
            | Error::InvalidQuad(_)
            | Error::InvalidGrid(_) => "invalid_input",
            Error::OutsideInterval { .. } => "outside_interval",
            Error::Degenerate(_) => "degenerate",
            Error::GammaDomain(_) => "gamma_domain",
            Error::NegativeWeight { .. } => "negative_weight",
            Error::AsymmetricWeight { .. } => "asymmetric_weight",
        }
    }
}
