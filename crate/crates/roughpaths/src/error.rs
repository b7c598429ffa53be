//! Crate-wide error type.
//!
//! Grid lookups are exact: querying a time that is not a stored grid point is
//! a domain error (`OffGrid`), never an interpolation.

use thiserror::Error;

/// Errors produced by construction, queries, solvers, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A queried time is not a grid point of the object it was asked of.
    #[error("time {t} is not a grid point (off-grid queries are domain errors)")]
    OffGrid { t: f64 },

    /// An (s, t) query with s > t, or s/t outside the grid span.
    #[error("invalid interval query [{s}, {t}]")]
    BadInterval { s: f64, t: f64 },

    /// Grid times must be finite and strictly increasing, with at least two points.
    #[error("grid times must be finite, strictly increasing, and contain >= 2 points")]
    BadGrid,

    /// A parameter is outside its documented range.
    #[error("parameter `{name}` = {got} out of range (expected {expected})")]
    ParamRange {
        name: &'static str,
        expected: &'static str,
        got: String,
    },

    /// Shapes of two objects that must share a grid or dimension disagree.
    #[error("mismatch: {0}")]
    Mismatch(String),

    /// A scaling ratio was requested where the control vanishes but the
    /// numerator does not.
    #[error("control vanishes on [{s}, {t}] but the remainder there is {remainder:e}")]
    DegenerateControl { s: f64, t: f64, remainder: f64 },

    /// An explicit step would violate the stability restriction and
    /// `force` was not set.
    #[error("time step {dt:e} violates the stability bound {bound:e}; pass force to override")]
    Cfl { dt: f64, bound: f64 },

    /// Malformed input data (CSV contents, config files, spec strings).
    #[error("invalid data: {0}")]
    Data(String),

    /// Unknown or ill-typed configuration key (usage error).
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
