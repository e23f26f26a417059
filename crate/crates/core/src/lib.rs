//! High-precision building blocks for bilateral basic hypergeometric series,
//! elliptic Lagrange interpolation of type `BC_n`, and truncated `BC_n`
//! Jackson integrals, together with residual checks for the classical
//! identities they satisfy (Bailey's sum, Slater's transformation, the
//! van Diejen product, transition-matrix determinants, Wronskian
//! determinants and the connection formula).
//!
//! All arithmetic runs on arbitrary-precision complex numbers backed by
//! MPFR, at a precision fixed by a [`PrecisionContext`]. Identity checks
//! are numerical: both sides of an identity are computed along independent
//! code paths and compared as relative residuals.
//!
//! Module map:
//! - [`qnum`]: precision context, complex arithmetic, q-shifted factorials,
//!   the theta function and the `e(a;b)` symbol.
//! - [`qseries`]: bilateral series with convergence-checked truncation;
//!   Bailey and Slater residuals.
//! - [`indexsets`]: multi-index combinatorics, special points, ordered set
//!   partitions, genericity diagnostics.
//! - [`matrix`]: dense arbitrary-precision complex linear algebra (LU,
//!   triangular inversion, Neumann path-sum inverse).
//! - [`interp`]: the interpolation functions `E_lambda(x;z)` by three
//!   independent routes, dual functions, kernel, duality residual.
//! - [`transition`]: transition matrices between interpolation bases and
//!   their closed-form determinants.
//! - [`bcjackson`]: lattice sums for truncated Jackson integrals, weight /
//!   regularizer ratios, symplectic Schur functions, van Diejen, Wronskian
//!   and connection residuals.

pub mod bcjackson;
pub mod error;
#[cfg(test)]
pub(crate) mod testutil;
pub mod indexsets;
pub mod interp;
pub mod matrix;
pub mod qnum;
pub mod qseries;
pub mod transition;

pub use error::{Error, Result};
pub use indexsets::{IndexKind, MultiIndex, ParameterSet};
pub use matrix::ComplexMatrix;
pub use qnum::{Complex, PrecisionContext};

/// Relative residual `|a - b| / (|a| + |b|)`, reported as `f64`.
///
/// Returns 0 when both arguments vanish.
pub fn rel_residual(a: &Complex, b: &Complex) -> f64 {
    let num = (a - b).abs();
    let den = a.abs() + b.abs();
    if den.is_zero() {
        return 0.0;
    }
    (num / den).to_f64()
}

/// Residual of an identity that involves truncated lattice sums: the
/// relative residual plus the truncation noise floor it has to be compared
/// against.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// Relative residual `|lhs - rhs| / (|lhs| + |rhs|)`.
    pub residual: f64,
    /// Accumulated relative shell error of every lattice sum involved.
    pub shell_error: f64,
    /// Total lattice terms evaluated.
    pub terms_used: u64,
}

impl ResidualReport {
    /// Pass threshold: `max(eps, 20 * shell_error)`.
    pub fn passes(&self, eps: f64) -> bool {
        self.residual < eps.max(20.0 * self.shell_error)
    }
}
