//! Spectral tools on the supported self-adjoint class: a finite dense block
//! followed by a scalar tail. Detects the class from a structured operator,
//! applies functions through the eigendecomposition, and splits a product
//! into partial isometry times positive part.

use num_complex::Complex64;
use opword::kernel::StructuredOperator;
use opword::spectral::{func_calc, polar_decompose, CalcFn, FiniteScalarSelfAdjoint};

fn main() -> opword::Result<()> {
    // Self-adjoint with a 2x2 block, then 1 down the diagonal forever.
    let t = StructuredOperator::from_entries([
        (1, 1, Complex64::new(0.5, 0.0)),
        (1, 2, Complex64::new(0.25, 0.0)),
        (2, 1, Complex64::new(0.25, 0.0)),
        (2, 2, Complex64::new(0.75, 0.0)),
    ])
    .add(&StructuredOperator::tail_identity(3, Complex64::ONE))?;

    let fssa = FiniteScalarSelfAdjoint::detect(&t)?;
    let spec = fssa.eig();
    println!(
        "block eigenvalues {:?}, tail value {}",
        spec.eigenvalues, spec.tail_scalar
    );

    // Functions factor through the spectrum: cos(arccos T) gives T back.
    let arc = func_calc(&fssa, CalcFn::Arccos)?;
    let back = func_calc(&FiniteScalarSelfAdjoint::detect(&arc)?, CalcFn::Cos)?;
    println!("cos(arccos T) == T: residual {:.1e}", back.window_residual(&t, 64));

    // A = exp(i arccos T) is unitary; with B = A* the pair averages back to
    // the cosine and splits off the sine.
    let a = func_calc(&fssa, CalcFn::ExpIArccos)?;
    let b = a.adjoint();
    println!("A unitary: residual {:.1e}", a.unitarity_residual(64)?);
    let two_t = t.scale(Complex64::new(2.0, 0.0));
    println!("A + B == 2T: residual {:.1e}", a.add(&b)?.window_residual(&two_t, 64));
    let square = StructuredOperator::identity().sub(&t.mul(&t)?)?;
    let sine = func_calc(&FiniteScalarSelfAdjoint::detect(&square)?, CalcFn::Sqrt)?;
    let two_i_sine = sine.scale(Complex64::new(0.0, 2.0));
    println!(
        "A - B == 2i(1 - T^2)^(1/2): residual {:.1e}",
        a.sub(&b)?.window_residual(&two_i_sine, 64)
    );

    // Polar splitting: S T is shift times positive, and the factors land
    // back on the input.
    let skew = StructuredOperator::shift().mul(&t)?;
    let (partial, abs) = polar_decompose(&skew)?;
    println!(
        "S T = u |T|: reconstruction residual {:.1e}",
        partial.mul(&abs.to_operator())?.window_residual(&skew, 64)
    );
    println!(
        "u is a partial isometry: residual {:.1e}",
        partial
            .mul(&partial.adjoint())?
            .mul(&partial)?
            .window_residual(&partial, 64)
    );
    Ok(())
}
