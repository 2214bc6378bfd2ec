use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("causal class undefined for 0")]
    ZeroVector,

    #[error("non-finite vector component")]
    NonFinite,

    #[error("vector is not lightlike (self product {0:e})")]
    NotLightlike(f64),

    #[error("plane not Lorentzian (Gram determinant {0:e})")]
    NotLorentzian(f64),

    #[error("near-degenerate tangent Gram matrix at ({x}, {y}): |det G| = {det:e}")]
    DegenerateTangent { x: f64, y: f64, det: f64 },

    #[error("rank-deficient immersion at ({x}, {y})")]
    RankDeficient { x: f64, y: f64 },

    #[error("point ({x}, {y}) lies outside the patch domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("numerical consistency failure: {0}")]
    Consistency(String),

    #[error("point ({x}, {y}) is not critical for its pedal direction (|grad| = {grad:e})")]
    NotCritical { x: f64, y: f64, grad: f64 },

    #[error("iteration did not converge: {0}")]
    NotConverged(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("surface spec: {0}")]
    Spec(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    /// Whether the failure originates in numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateTangent { .. }
                | Error::RankDeficient { .. }
                | Error::NumericalDomain(_)
                | Error::Consistency(_)
                | Error::NotCritical { .. }
                | Error::NotConverged(_)
                | Error::NotLightlike(_)
                | Error::NotLorentzian(_)
                | Error::ZeroVector
        )
    }
}
