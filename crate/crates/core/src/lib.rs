//! Matrix product approximations of chiral WZW and free-boson correlators.
//!
//! The pipeline builds truncated highest-weight modules of an affine Lie
//! algebra (or the Heisenberg algebra), primary fields between them,
//! regularizes and truncates the fields, and contracts them into a matrix
//! product state whose value approximates an n-point correlator.

pub mod algebra;
pub mod character;
pub mod bounds;
pub mod cache;
pub mod error;
pub mod field;
pub mod irrep;
pub mod linalg;
pub mod module;
pub mod mps;
pub mod oracle;
pub mod pbw;
pub mod regularize;
pub mod scalar;

pub use algebra::{AlgebraData, AlgebraKind, HighestWeight};
pub use error::{Error, Result};
