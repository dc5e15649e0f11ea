// Validation guards use `!(x > 0.0)` so that NaN is rejected along with
// out-of-range values; the suggested `x <= 0.0` would silently admit NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Verification toolkit for canonical-duality constructions on small quadratic
//! programs.
//!
//! Three problem families are covered, each pairing a primal program with its
//! canonical dual:
//!
//! * [`qc`] — a quadratic objective over one quadratic inequality constraint,
//!   with a one-dimensional rational dual whose critical points are found by
//!   pole-aware scanning.
//! * [`boxqp`] — a quartic-plus-quadratic objective over a box, with a dual in
//!   the multiplier pair (ς, σ) and explicit perturbation paths around the
//!   canonical counterexample instance.
//! * [`binary`] — 0-1 quadratic programming, with complete closed-form
//!   enumeration of dual critical points and certification of the corrected
//!   global/local optimality statements.
//!
//! [`oracle`] supplies the independent checking machinery (brute force, grid
//! and ball sampling, local-extremum classification), [`fd`] the finite
//! difference derivative oracles, [`linalg`] the dense symmetric kernel, and
//! [`report`]/[`problem_file`]/[`repro`] the reporting layer used by the
//! `dualqp` command-line binary.

pub mod binary;
pub mod boxqp;
pub mod fd;
pub mod linalg;
pub mod oracle;
pub mod problem_file;
pub mod qc;
pub mod report;
pub mod repro;

/// Crate-wide error type. Variants mirror the failure modes of the numeric
/// kernel (singular systems, non-finite samples), the per-family preconditions
/// (poles, non-critical points, branch mismatches) and the resource guards.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular within tolerance (smallest |eigenvalue| {smallest:.3e} <= {tol:.3e})")]
    SingularMatrix { smallest: f64, tol: f64 },
    #[error("objective returned a non-finite value at a finite-difference sample point")]
    NonFiniteSample,
    #[error("dual function has a pole at sigma = {sigma} (A + sigma*C singular)")]
    PoleAtSigma { sigma: f64 },
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    #[error("point is not critical: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotCritical { residual: f64, tol: f64 },
    #[error("G(varsigma, sigma) is singular at the requested dual point")]
    SingularG,
    #[error("{what} = {value} is outside the valid range {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("Q_d(sigma) is singular at the requested sigma")]
    SingularQd,
    #[error("instance too large: {what} = {got} exceeds limit {limit}")]
    InstanceTooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("operation requires a {expected} pair, got {got}")]
    WrongBranch {
        expected: &'static str,
        got: String,
    },
    #[error("feasible-point sampler produced no usable points")]
    EmptySampler,
    #[error("invalid problem data: {0}")]
    InvalidProblem(String),
}

pub type Result<T> = std::result::Result<T, Error>;
