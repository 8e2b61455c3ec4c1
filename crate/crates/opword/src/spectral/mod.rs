//! Spectral layer: the finite-block-plus-scalar-tail self-adjoint class,
//! its functional calculus, and the isometry surgery built on top of it.

pub mod fssa;
pub mod support;
pub mod surgery;

pub use fssa::{
    from_matrix, func_calc, polar_decompose, CalcFn, FiniteScalarSelfAdjoint, SpectralData,
    CLAMP_EPS, EIGEN_ONE_EPS, HERM_EPS, KERNEL_EPS, PROJ_EPS,
};
pub use support::{as_coordinate_projection, ascending_match, coordinate_form, IndexSet};
pub use surgery::{extend_partial_isometry, isometry_column_factor, ExtendMode};
