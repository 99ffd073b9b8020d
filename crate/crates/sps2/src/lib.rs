//! Reconstruction of depth-3 arithmetic circuits with top fan-in two
//! (ΣΠΣ(2,n,d,F)) from black-box evaluation access over finite fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`] — arithmetic in F_q and its extensions F_{q^k};
//! * [`linalg`] — linear forms, exact linear algebra over F_q, invertible
//!   variable changes;
//! * [`mpoly`] / [`unipoly`] — dense multivariate polynomials and the
//!   univariate toolkit (gcd, root finding over the extension);
//! * [`oracle`] — black-box polynomial access and its combinator algebra
//!   (composition, restriction, division by linear factors, interpolation,
//!   randomized identity testing);
//! * [`circuit`] — explicit ΣΠΣ circuits, the canonical G·(T1+T2)
//!   decomposition, the random instance generator, JSON (de)serialization;
//! * [`linfactor`] — extraction of all base-field linear factors of a
//!   black-box polynomial, producing the nonlinear-part oracle;
//! * [`vanish`] — the codimension-2 subspaces on which the nonlinear part
//!   vanishes, with a brute-force cross-check oracle;
//! * [`geometry`] — ordinary-line computations on projective point sets;
//! * [`candidates`] — candidate linear forms derived from the vanishing set;
//! * [`reconstruct`] — the low-rank, corner-case and high-rank
//!   reconstruction drivers;
//! * [`cli`] — instance generation / reconstruction / verification commands
//!   shared by the `sps2` binary and the examples.

pub mod candidates;
pub mod circuit;
pub mod cli;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod linfactor;
pub mod mpoly;
pub mod oracle;
pub mod reconstruct;
pub mod unipoly;
pub mod vanish;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Division or inversion of zero in the field.
    #[error("division by zero in the field")]
    DivisionByZero,
    /// Mismatched variable counts or field parameters between operands.
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    /// A documented precondition of an operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Exact division was requested but the divisor does not divide.
    #[error("not divisible")]
    NotDivisible,
    /// A size/configuration gate for a brute-force path was exceeded.
    #[error("configuration gate exceeded: {0}")]
    ConfigGate(String),
    /// A randomized subroutine ran out of its retry budget.
    #[error("resample budget exhausted: {0}")]
    ResampleExhausted(String),
    /// Structurally degenerate input (e.g. proportional gates).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// The conservative gluing step could not find a consistent merge.
    #[error("merge failure: {0}")]
    MergeFailure(String),
    /// An internal consistency check failed; indicates a bug or an input
    /// outside the supported regime.
    #[error("internal invariant violated: {0}")]
    Internal(String),
    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
