//! Error type shared across the crate.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("map in M (zero resultant): {context}")]
    DegenerateMap { context: String },

    #[error("both lift components vanish at a point of P^1; map should be degenerate")]
    LiftVanishes,

    #[error("root finder did not converge on coefficients {coeffs:?}")]
    RootFinding { coeffs: Vec<Complex64> },

    #[error("preimage residual {residual:.3e} exceeds tolerance for coefficients {coeffs:?}")]
    PreimageResidual {
        residual: f64,
        coeffs: Vec<Complex64>,
    },

    #[error("parameter left the family domain at orbit index {index}: {reason}")]
    ParameterDomain { index: usize, reason: String },

    #[error("degenerate map at orbit index {index}")]
    DegenerateAtIndex { index: usize },

    #[error("series tail bound {tail:.3e} too large, deepen series (need < {required:.3e})")]
    TailTooLarge { tail: f64, required: f64 },

    #[error("driver failed the compliance diagnostics: {0}")]
    NonCompliantDriver(String),

    #[error("no recurrence time within horizon {horizon} at radius {radius}")]
    NoRecurrence { horizon: usize, radius: f64 },

    #[error("observable has non-finite values on the grid")]
    NonFiniteObservable,
}

pub type Result<T> = std::result::Result<T, CoreError>;
