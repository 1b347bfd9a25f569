//! Finite-dimensional toolkit for Jordan and Lie algebras of matrices.
//!
//! The crate covers the numeric substrate (complex matrices, Schatten norms,
//! spectra), subspace and matrix-span bookkeeping, closure engines for
//! Jordan/Lie/associative algebras, Riesz projections of `A` and `ad(A)`,
//! verifiers for trace-word and Jordan identities, and a simultaneous
//! triangularization engine that produces a maximal invariant subspace chain
//! for a set of nilpotent generators.
//!
//! Everything is a pure function over immutable values. Batch entry points
//! take an [`Execution`] so callers can choose between the rayon-backed
//! parallel path (feature `parallel`, on by default) and the sequential one.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod commands;
pub mod error;
pub mod identities;
pub mod instance;
pub mod matrix;
pub mod par;
mod jacobi;
mod schur;
pub mod spectral;
pub mod subspace;
pub mod triangularize;

pub use algebra::{AlgebraBasis, AlgebraKind, GeneratorSet};
pub use commands::{CommandOptions, CommandReport, Status};
pub use error::{Error, ErrorClass, Result};
pub use identities::{IdentityCheck, IdentityReport};
pub use instance::{gen_random, InstanceFile, InstanceMetadata};
pub use matrix::{ComplexMatrix, ToleranceConfig, C64};
pub use par::Execution;
pub use spectral::{SpectralCluster, SpectralDecomposition};
pub use subspace::{MatrixSpace, Subspace};
pub use triangularize::{Reducibility, SubspaceChain, TriangularizationCertificate};
