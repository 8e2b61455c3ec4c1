//! Producing and repairing partial isometries.
//!
//! Isometric column pairs factor as `B = v (1 - A*A)^(1/2)`; partial
//! isometries extend to isometries or unitaries by matching the deficiency
//! of their initial space into the deficiency of their final space.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::StructuredOperator;

use super::fssa::{FiniteScalarSelfAdjoint, KERNEL_EPS};
use super::support::{ascending_match, coordinate_form};

/// Residual allowed when validating inputs and constructed extensions.
const SURGERY_EPS: f64 = 1e-8;

/// Given an isometric column `[A; B]` (that is, `A*A + B*B = 1`), returns
/// the partial isometry `v` with `B = v (1 - A*A)^(1/2)`, supported on the
/// range of `1 - A*A`.
pub fn isometry_column_factor(
    a: &StructuredOperator,
    b: &StructuredOperator,
) -> Result<StructuredOperator> {
    let gram = a.adjoint().mul(a)?.add(&b.adjoint().mul(b)?)?;
    let k = gram.support_bound().max(8) * 2;
    let defect = gram.window_residual(&StructuredOperator::identity(), k);
    if defect > SURGERY_EPS {
        return Err(Error::NotIsometricColumn(defect));
    }
    let complement = StructuredOperator::identity().sub(&a.adjoint().mul(a)?)?;
    let spec = FiniteScalarSelfAdjoint::detect(&complement)?.eig();
    let inv_root = spec.map(|x| {
        if x > KERNEL_EPS {
            Complex64::new(1.0 / x.max(0.0).sqrt(), 0.0)
        } else {
            Complex64::ZERO
        }
    });
    b.mul(&inv_root)
}

/// What an extension must achieve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtendMode {
    /// Full initial space: the result `w` satisfies `w*w = 1`.
    ToIsometry,
    /// Full initial and final space: the result is unitary.
    ToUnitary,
}

/// Extends the partial isometry `u` to an isometry or unitary `w` agreeing
/// with `u` on its initial space.
///
/// With a `constraint` c supplied, the extension acts as `c` on the
/// complement of the initial space, and it is an error if that does not
/// produce the requested kind of operator. Without one, the deficiencies on
/// both sides are put in coordinate form and matched in ascending order,
/// which fails with a dimension obstruction when the final-space deficiency
/// is too small.
pub fn extend_partial_isometry(
    u: &StructuredOperator,
    mode: ExtendMode,
    constraint: Option<&StructuredOperator>,
) -> Result<StructuredOperator> {
    let initial = u.adjoint().mul(u)?;
    let window = (initial.support_bound().max(8) * 2).max(32);
    let idem = initial.mul(&initial)?.window_residual(&initial, window);
    if idem > SURGERY_EPS {
        return Err(Error::InvalidInput(format!(
            "not a partial isometry: u*u fails to be idempotent by {idem:.3e}"
        )));
    }
    let init_defect = StructuredOperator::identity().sub(&initial)?;
    let fin_defect = StructuredOperator::identity().sub(&u.mul(&u.adjoint())?)?;
    let w = if let Some(c) = constraint {
        u.add(&c.mul(&init_defect)?)?
    } else if init_defect.is_zero() && (mode == ExtendMode::ToIsometry || fin_defect.is_zero()) {
        u.clone()
    } else {
        let (g_init, e_init) = coordinate_form(&init_defect)?;
        let (g_fin, e_fin) = coordinate_form(&fin_defect)?;
        if mode == ExtendMode::ToUnitary && e_init.is_finite() != e_fin.is_finite() {
            return Err(Error::DimensionObstruction {
                stage: "extend",
                detail: "initial and final deficiencies differ in kind".into(),
            });
        }
        if let (Some(ni), Some(nf)) = (e_init.len(), e_fin.len()) {
            let bad = match mode {
                ExtendMode::ToIsometry => ni > nf,
                ExtendMode::ToUnitary => ni != nf,
            };
            if bad {
                return Err(Error::DimensionObstruction {
                    stage: "extend",
                    detail: format!("deficiency {ni} cannot fill deficiency {nf}"),
                });
            }
        }
        let matched = ascending_match(&e_init, &e_fin)?;
        let bridge = g_fin.adjoint().mul(&matched)?.mul(&g_init)?;
        u.add(&bridge)?
    };
    let window = (w.support_bound().max(8) * 2).max(32);
    let gram = w.adjoint().mul(&w)?;
    let res = gram.window_residual(&StructuredOperator::identity(), window);
    if res > SURGERY_EPS {
        return Err(Error::NotUnitary { stage: "extend", residual: res });
    }
    if mode == ExtendMode::ToUnitary {
        let gram = w.mul(&w.adjoint())?;
        let res = gram.window_residual(&StructuredOperator::identity(), window);
        if res > SURGERY_EPS {
            return Err(Error::NotUnitary { stage: "extend", residual: res });
        }
    }
    Ok(w)
}
