use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input too coarse, zero-length, or otherwise unusable before any
    /// geometry can be computed.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A curve failed validation for an operation that requires a
    /// well-formed generating curve.
    #[error("invalid curve: {0}")]
    Validation(String),

    /// The radial coordinate vanishes at an interior node, so the parallel
    /// curvature is undefined there.  Split the curve at its axis touches
    /// first (`curve::split_at_axis`).
    #[error(
        "singular node {index}: x = {x:.3e} vanishes away from the endpoints; \
         split the curve at its axis touches before computing curvatures"
    )]
    SingularNode { index: usize, x: f64 },

    /// Material parameters outside the coercive regime, or an epsilon that
    /// leaves it.  The message names the violated condition.
    #[error("coercivity range: {0}")]
    CoercivityRange(String),

    /// Two component traces intersect, so the system does not describe an
    /// embedded union of surfaces.
    #[error(
        "components {first} and {second} intersect near ({x:.6}, {z:.6}); \
         translate components along the z-axis to separate them"
    )]
    OverlappingComponents { first: usize, second: usize, x: f64, z: f64 },

    /// Winding index requested at a point lying on the curve itself.
    #[error("winding index undefined: point lies on the curve")]
    PointOnCurve,

    /// A seed family cannot reach the requested area/volume pair.
    #[error("seeding: {0}")]
    Seeding(String),

    /// Constraint targets violate the isoperimetric inequality, so no
    /// surface satisfies them.
    #[error("infeasible constraints: {0}")]
    InfeasibleConstraints(String),

    /// The analytic and finite-difference gradients disagree; the optimizer
    /// refuses to run on a broken gradient.
    #[error(
        "gradient cross-check failed: analytic and finite-difference gradients \
         differ by {max_rel:.3e} (relative, max norm) at iteration 0"
    )]
    GradientMismatch { max_rel: f64 },

    /// Every attempted run finished without meeting the convergence
    /// criteria (as opposed to failing to run at all).
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// Malformed input file.
    #[error("parse error at line {line}, field {field}: {message}")]
    Parse { line: usize, field: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
