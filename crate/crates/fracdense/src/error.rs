//! Crate-wide error type.

/// Errors shared by every module in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An iterative procedure ran out of budget before reaching its target.
    #[error("{context}: did not converge ({detail})")]
    NonConvergence {
        context: &'static str,
        detail: String,
    },

    /// An integrand produced NaN or infinity.
    #[error("integrand returned a non-finite value at t = {at}")]
    NonFinite { at: f64 },

    /// Singular-weight exponent outside (0, 1).
    #[error("singular exponent must lie in (0, 1), got {0}")]
    BadExponent(f64),

    /// Parameter or construction input violates a documented invariant.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A point is on the wrong side of the extension ball.
    #[error("geometry violation: {0}")]
    Geometry(String),

    /// Derivative evaluation requested too close to the ball boundary.
    #[error("evaluation point is {dist:.3e} from the boundary, need at least {min:.3e}")]
    TooCloseToBoundary { dist: f64, min: f64 },

    /// Derivative order above the supported maximum.
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    OrderTooHigh { order: usize, max: usize },

    /// Rescaling factor outside (0, 1].
    #[error("rescaling factor must lie in (0, 1], got {0}")]
    BadEta(f64),

    /// A function assumed compactly supported fails to vanish at a probe point.
    #[error("function does not vanish beyond the cutoff: |u({at})| = {value:.3e}")]
    Support { at: f64, value: f64 },

    /// Derivative matrix does not span the requested jet space.
    #[error("derivative matrix has rank {rank}, need {needed}")]
    RankDeficient { rank: usize, needed: usize },

    /// Requested accuracy cannot be met within the representable range.
    #[error("overflow risk: {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
