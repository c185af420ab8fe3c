//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by basis construction, solvers and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A water depth at or below the dry tolerance was fed to a flux or
    /// reconstruction kernel. The model has no wetting-and-drying support,
    /// so this aborts the run with as much context as is known.
    #[error("non-positive water depth {depth} m{context}")]
    DepthPositivity { depth: f64, context: String },

    /// Requested expansion order above the supported cap.
    #[error("basis order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: usize, max: usize },

    /// Quadrature rules need at least one node.
    #[error("quadrature rule needs at least one node")]
    EmptyQuadrature,

    /// An integrand evaluated to a non-finite value at a quadrature node.
    #[error("integrand is not finite at quadrature node {node_index} (xi = {node})")]
    NonFiniteIntegrand { node_index: usize, node: f64 },

    /// Moments are defined for order m >= 1.
    #[error("moment order must be at least 1")]
    ZeroMomentOrder,

    /// Density reconstruction needs a genuinely random expansion.
    #[error("cannot reconstruct a density for {what}: the expansion is deterministic (all coefficients above order 0 vanish)")]
    DegenerateDistribution { what: String },

    /// Mismatched sequence lengths where equal lengths are required.
    #[error("length mismatch: {left} vs {right} ({context})")]
    LengthMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    /// Invalid inputs that do not fit a more specific variant.
    #[error("{0}")]
    InvalidInput(String),

    /// A bed table lookup outside the tabulated range.
    #[error("x = {x} m is outside the tabulated bed range [{min}, {max}] m")]
    BedTableRange { x: f64, min: f64, max: f64 },

    /// Unknown built-in test case name.
    #[error(
        "unknown test case '{0}' (expected lakeAtRest, criticalSteadyState or tsengSteadyState)"
    )]
    UnknownCase(String),

    /// Unknown source-term discretisation name.
    #[error("unknown discretisation '{0}' (expected wellBalancedH or centredDifferenceH)")]
    UnknownDiscretisation(String),

    /// File reading/writing failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A text table row that could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
