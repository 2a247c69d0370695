//! Exact workbench for divisor ranks and sheaf cohomology on the two-vertex
//! graph category.
//!
//! The underlying category has five objects: two "vertex" objects `A1`, `A2`
//! and three "edge" objects `B1`, `B2`, `B3`, with one arrow `Ai -> Bj`
//! whenever the pair is incident (`A1B1`, `A2B2`, `A1B3`, `A2B3`).  A sheaf
//! assigns a graded space to each object and a restriction map `F(Bj) ->
//! F(Ai)` to each arrow.  Everything in this crate is exact: scalars live in
//! the rationals or a prime field, graded spaces are unions of arithmetic
//! progressions, and all restriction maps are monomial (affine exponent rules
//! with scalar coefficients), so kernels and cokernels of the global-section
//! complex can be computed either in closed form, by walking the incidence
//! graph of basis vectors, or by exact truncated linear algebra.
//!
//! Modules:
//! - [`divisor`]: divisor arithmetic on the two-vertex graph — rank (three
//!   independent methods), lattice-point counts, normalization, level sets.
//! - [`sheaf`]: graded spaces, monomial maps, the five-object sheaf type and
//!   its constructors (structure sheaf, rank-`r` models, line bundles,
//!   skyscrapers, coskyscrapers, constants, tensor product).
//! - [`morphism`]: sheaf morphisms, validation, and the one-point twist
//!   short exact sequence.
//! - [`cohomology`]: the two-term global-section complex and three Betti
//!   engines (closed form, component walker, truncated window).
//! - [`homology`]: Hom solving, Ext against skyscrapers, the projective
//!   resolution of the structure sheaf, duality checks, tensor diagnostics.
//! - [`field`] / [`linalg`]: exact scalar fields and sparse/dense rank and
//!   kernel computations used by every engine.

pub mod apset;
pub mod cohomology;
pub mod divisor;
pub mod field;
pub mod homology;
pub mod linalg;
pub mod morphism;
pub mod report;
pub mod sheaf;

pub use cohomology::BettiValue;
pub use divisor::{Divisor, EdgeCount, LatticePoint};
pub use field::{FieldSpec, PrimeField, Rationals, Scalar};
pub use report::{CheckResult, ReportEnvelope};
pub use sheaf::{GradedSpace, MonomialMap, MonomialTerm, Obj, Sheaf2V, SlotSupport};

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("edge count must be a positive integer, got {0}")]
    InvalidEdgeCount(i64),
    #[error("not a partial line bundle: {0}")]
    NotPartialLineBundle(String),
    #[error("walker engine inapplicable: {0}")]
    WalkerInapplicable(String),
    #[error("incidence degree exceeds 2 at {0}")]
    DegreeExceeded(String),
    #[error("Betti number not certified finite: {0}")]
    NotFinite(String),
    #[error("module tags disagree: {0:?} vs {1:?}")]
    TagMismatch(Option<i64>, Option<i64>),
    #[error("tensor requires free (torsion-less) values: {0}")]
    TorsionTensor(String),
    #[error("unsupported slot shape: {0}")]
    UnsupportedSlot(String),
    #[error("sheaf validation failed: {0}")]
    Validation(String),
    #[error("computation budget exceeded: {0}")]
    Budget(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
