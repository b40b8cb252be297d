//! Crate-wide error type.

/// Errors shared by the analysis and simulation modules.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An adaptive quadrature exhausted its subdivision budget before the
    /// error estimate met the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    /// The root finder could not locate a root within its iteration budget.
    #[error("no root found: {0}")]
    NoRoot(String),

    /// Simulation window too small for the configured density; boundary
    /// effects would dominate.
    #[error(
        "window half-width {half_width} m is below the minimum {min} m \
         required at density {density} per m^2"
    )]
    WindowTooSmall {
        half_width: f64,
        min: f64,
        density: f64,
    },

    /// Rejection sampling failed to produce an accepted point within its
    /// trial budget. Cells always have positive area, so hitting this
    /// indicates a degenerate geometry or a bug.
    #[error("rejection sampling exceeded {budget} trials")]
    RejectionBudgetExceeded { budget: u64 },

    /// Conditional area moments came out inconsistent (negative variance
    /// beyond numerical tolerance).
    #[error("invalid conditional moments: {0}")]
    InvalidMoments(String),

    /// The fitted mixture shape parameters are unusable.
    #[error("invalid fitted shape: alpha = {alpha}, beta = {beta}")]
    InvalidShape { alpha: f64, beta: f64 },

    /// The inverse area moment does not converge for the fitted shape.
    #[error("inverse area moment diverges: {0}")]
    DivergentMoment(String),

    /// An argument lies outside the domain of the requested quantity.
    #[error("{what} = {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A realization carries no interfering users, so its SIR is undefined.
    #[error("realization has no interferers")]
    NoInterferers,

    /// A configuration parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
