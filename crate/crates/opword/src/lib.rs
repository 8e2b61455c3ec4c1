//! Exact structured operators on ℓ²(ℕ) ⊕ ℓ²(ℕ) and bounded-length
//! factorization of block unitaries into words over eight generators and
//! block-diagonal unitaries.
//!
//! The crate is organized bottom-up:
//!
//! - [`kernel`]: the closed operator class (sparse block + weighted affine
//!   tails) with exact products, adjoints, and window comparisons;
//! - [`spectral`]: eigendecomposition, functional calculus, polar
//!   decomposition, and partial-isometry surgery for the
//!   "finite Hermitian block ⊕ scalar tail" subclass;
//! - [`generators`]: the eight generator matrices, diagonal letters, words,
//!   and the shift-power word constructions;
//! - [`factorizer`]: the staged reduction of a supported block unitary to the
//!   identity, emitting the inverse word and a verified trace;
//! - [`harness`]: seeded input generation, suite execution, and reports.

pub mod error;
pub mod factorizer;
pub mod generators;
pub mod harness;
pub mod kernel;
pub mod spectral;

pub use error::{Error, Result};
