use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{function}: argument {value} outside the validity range {range}")]
    Domain {
        function: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate parametrization: |x'(s)| vanishes at s = {s}")]
    DegenerateCurve { s: f64 },
    #[error("zero-length vector where a direction was required")]
    ZeroVector,
    #[error("coincident points in a kernel that is singular at r = 0")]
    CoincidentPoints,
    #[error("order {n} exceeds the available range (max {max})")]
    OrderOutOfRange { n: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value produced at order {order}: {what}")]
    NonFinite { order: usize, what: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Whether the error stems from invalid input rather than a breakdown of the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::DegenerateCurve { .. }
                | Error::ZeroVector
                | Error::Dimension(_)
                | Error::OrderOutOfRange { .. }
                | Error::Domain { .. }
                | Error::CoincidentPoints
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
