//! Absolute tolerances shared by the construction gates and the checks.
//!
//! All quantities compared against these are O(1) after normalization, so
//! every comparison is absolute.

/// Construction-time normalization of probability densities.
pub const NORMALIZATION: f64 = 1e-10;

/// Algebraic identities that hold exactly in real arithmetic.
pub const ALGEBRAIC: f64 = 1e-12;

/// Identities accumulated over a chain of matrix products.
pub const ACCUMULATED: f64 = 1e-10;

/// Row integral of each proposal conditional density.
pub const PROPOSAL_ROW: f64 = 1e-8;

/// Largest sub-kernel row excess tolerated before clamping the rejection mass.
pub const ROW_CLOSURE_GATE: f64 = 1e-8;

/// Eigenvalue 1 is simple when the next eigenvalue is at most `1 - GAP_SIMPLICITY`.
pub const GAP_SIMPLICITY: f64 = 1e-8;

/// Default total-variation convergence target.
pub const TV_TARGET: f64 = 1e-8;

/// Constant in the statistical envelope `c * sqrt(n_points / n_replicas)`.
pub const ENVELOPE_C: f64 = 2.0;

/// Number of standard deviations used for entry-wise count comparisons.
pub const SIGMA_BOUND: f64 = 4.0;
