//! Exact-structure arithmetic for semi-infinite operators.

pub mod affine;
pub mod block;
pub mod operator;
pub mod progression;

pub use affine::AffineInjection;
pub use block::{BlockOperator, Half};
pub use operator::{StructuredOperator, TailTerm, DROP_EPS};
pub use progression::Progression;
