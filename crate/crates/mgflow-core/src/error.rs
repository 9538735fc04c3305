//! Error type shared by all core modules.

use alloc::string::String;

/// Errors produced by the geometry kernels, loop calculus, and integrator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum CoreError {
    /// A point violates its surface constraint beyond the on-surface tolerance.
    #[error("point off surface: {0}")]
    InvalidPoint(String),

    /// Retraction back onto the surface is undefined at this point
    /// (e.g. the origin for the sphere); flags numerical blow-up.
    #[error("retraction undefined: {0}")]
    DegeneratePoint(String),

    /// A field/surface combination that is not defined (e.g. the exact
    /// sinusoidal potential on a non-torus surface).
    #[error("invalid field for surface: {0}")]
    InvalidField(String),

    /// A loop violates a structural invariant (sample count, closure,
    /// non-finite data, inconsistent winding, ...).
    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    /// Constructor or operation parameters out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Time step exceeds the parabolic stability bound.
    #[error("unstable time step: dt={dt:.6e} exceeds stable_dt={stable:.6e}")]
    UnstableDt { dt: f64, stable: f64 },

    /// The integrator left the representable regime (retraction failed or
    /// samples became non-finite). The flow run that observes this reports
    /// a diverged outcome with the blow-up flag set.
    #[error("numerical blow-up at t={time:.6}: {reason}")]
    NumericalBlowup { time: f64, reason: String },

    /// A latitude circle with zero axial cosine has no defined angular rate.
    #[error("undefined angular rate: cos(theta0) = 0")]
    UndefinedRate,

    /// A planar magnetic geodesic needs a nonzero field to close up.
    #[error("no closed orbit: field strength is zero")]
    NoClosedOrbit,

    /// Operation invoked on an outcome/state that does not satisfy its
    /// precondition (e.g. limit classification of a diverged run).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Rescaling is only defined for fields closed under strength scaling.
    #[error("unsupported field for this operation: {0}")]
    UnsupportedField(String),
}
