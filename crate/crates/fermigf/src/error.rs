//! Crate-wide error type.
//!
//! Every fallible operation returns [`Result`]; variants distinguish bad
//! inputs (rejected up front) from numerical failures detected mid-run.

use thiserror::Error;

/// Errors produced by grid construction, state preparation, curve
/// extraction, fitting, propagation, and the measurement chain.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor precondition failed (dimensions, signs, ranges).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A wave packet's 8-delta support does not fit inside the grid box,
    /// or amplitudes at the box edges are not negligible.
    #[error("wave packet does not fit inside the grid box: {0}")]
    PacketOutOfBox(String),

    /// Two states live on different grids or carry different constants.
    #[error("operands use mismatched grids or physical constants")]
    GridMismatch,

    /// A superposition cancelled to (numerically) the zero vector.
    #[error("state norm below 1e-12; the weights cancel the state")]
    ZeroVector,

    /// No grid point passes the amplitude floor.
    #[error("every grid point falls below the amplitude floor")]
    AllMasked,

    /// A curve lookup landed outside the valid (unmasked) region.
    #[error("position {0} is outside the valid region of the curve")]
    MaskedPoint(f64),

    /// The curve has no contiguous band where both branches are real.
    #[error("curve has no real-branch band")]
    NoRealBand,

    /// A band is too short to support the requested operation.
    #[error("real band has too few points: {got} < {needed}")]
    BandTooShort { got: usize, needed: usize },

    /// A conic fit or coefficient set fails a*b - c^2 > 0.
    #[error("conic is degenerate: a*b - c^2 = {0} <= 0")]
    DegenerateConic(f64),

    /// Moments violate the generalized uncertainty bound.
    #[error("moments violate the uncertainty bound: var_q*var_p - k^2 = {0}")]
    UncertaintyViolation(f64),

    /// Outward integration blew up; the anchor data select the growing
    /// solution instead of the decaying one.
    #[error("reconstruction diverged at q = {0}; anchor selects the growing solution")]
    ReconstructionDiverged(f64),

    /// No root of the scattering system inside the search bracket.
    #[error("no scattering root bracketed for nu in (0, {0}]")]
    NoRoot(f64),

    /// |beta0| outside the nonrelativistic regime of the solver.
    #[error("|beta0| = {0} is outside the supported regime (< 0.05)")]
    RegimeViolation(f64),

    /// Covariance matrix handed to the sampler is not positive definite.
    #[error("covariance matrix is not positive definite")]
    NonPositiveDefinite,

    /// No cell crosses the requested contour level.
    #[error("no contour exists at level fraction {0}")]
    EmptyContour(f64),

    /// A point-set distance was requested on an empty set.
    #[error("point set is empty")]
    EmptySet,

    /// The parabola map needs a nonzero force.
    #[error("drift parabola requires a nonzero uniform force")]
    ZeroForce,

    /// The Wigner transform produced a non-negligible imaginary part.
    #[error("phase-space transform imaginary residue {0} exceeds 1e-10")]
    SpectralResidue(f64),

    /// Scenario file is structurally valid JSON but semantically wrong.
    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that mean "the scenario/input was bad" as opposed
    /// to "a numerical run failed"; the CLI maps the former to exit 1 and
    /// the latter to exit 2.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::Scenario(_)
                | Error::Json(_)
                | Error::Io(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
