//! Exact-arithmetic calculus for algebraic actions of monoids on groups.
//!
//! Supports two backends: integer-matrix actions on Z^n and full shifts over
//! a finite group. From a finitely specified action the crate generates the
//! family of constructible subgroups, computes inverse-semigroup normal
//! forms, builds finite-level models of the boundary of tight characters,
//! and decides (or bounds) the structural properties of the associated
//! groupoid model: exactness, finite index, principal cofinality, minimality,
//! Hausdorffness, topological freeness, and proper infiniteness, with
//! verifiable witnesses where the proofs are constructive.

pub mod action;
pub mod analysis;
pub mod boundary;
pub mod family;
pub mod groupoid;
pub mod iso;
pub mod lattice;
pub mod matrix;
pub mod monoid;
pub mod poly;
pub mod report;
pub mod shift;

pub use report::Verdict;

/// Errors surfaced by the exact kernels and the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular; the action must be by injective endomorphisms")]
    SingularMatrix,
    #[error("sublattice is not contained in the superlattice")]
    NotContained,
    #[error("index is infinite")]
    InfiniteIndex,
    #[error("cover check requires finite-index pieces: {0}")]
    InfiniteIndexUnsupported(String),
    #[error("boundary enumeration requires finite-index members: {0}")]
    InfiniteIndexMember(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("witness construction requires a minimal groupoid (verdict: {0})")]
    NotMinimal(String),
    #[error("witness search exhausted at bound {0}")]
    WitnessSearchExhausted(usize),
    #[error("fix sets are not solvable in closed form for this element")]
    UnsupportedBackendForm,
    #[error("computation budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("backend mismatch: {0}")]
    BackendMismatch(String),
}
