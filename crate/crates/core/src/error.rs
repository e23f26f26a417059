//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by series evaluation, interpolation and lattice sums.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Precision-context construction failed (e.g. `|q| >= 1`).
    #[error("invalid precision context: {0}")]
    InvalidContext(String),

    /// An argument that must be nonzero was zero.
    #[error("zero argument in {0}")]
    ZeroArgument(&'static str),

    /// A q-shifted-factorial denominator vanished.
    #[error("pole: {0}")]
    Pole(String),

    /// The bilateral-series strip condition fails.
    #[error("divergent series: {0}")]
    DivergentSeries(String),

    /// A modulus or parameter-count precondition fails.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters too close to the zero set of a theta denominator.
    #[error("non-generic parameters: {0}")]
    NonGeneric(String),

    /// The Weyl denominator nearly vanishes at the given point.
    #[error("degenerate z: {0}")]
    DegenerateZ(String),

    /// Lattice shells failed to decay below the stop threshold.
    #[error("unconverged lattice sum: last shell {last_shell_rel:.3e} after {terms_used} terms")]
    Unconverged {
        /// Relative contribution of the last evaluated shell.
        last_shell_rel: f64,
        /// Terms evaluated before giving up.
        terms_used: u64,
    },

    /// Invalid harness configuration.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
