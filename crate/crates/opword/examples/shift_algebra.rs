//! Exact arithmetic in the structured operator ring: the unilateral shift,
//! the dyadic rescaling, weighted tails over arithmetic progressions, and
//! windowed residual checks. Nothing here is truncated; products and
//! adjoints stay inside the representation.

use num_complex::Complex64;
use opword::kernel::{Progression, StructuredOperator};

fn main() -> opword::Result<()> {
    // S e_i = e_{i+1} and L e_i = e_{2i}, each a single affine tail term.
    let shift = StructuredOperator::shift();
    let dyadic = StructuredOperator::dyadic();
    println!("S  e_3 = {:?}", shift.apply(3));
    println!("L  e_3 = {:?}", dyadic.apply(3));
    println!("L* e_6 = {:?}", dyadic.adjoint().apply(6));

    // Both are isometries. The shift misses only e_1.
    let id = StructuredOperator::identity();
    let gram = shift.adjoint().mul(&shift)?;
    println!("S*S = 1: {}", gram.window_eq(&id, 64, 0.0));
    let defect = id.sub(&shift.mul(&shift.adjoint())?)?;
    println!(
        "1 - SS* = projection on e_1: {}",
        defect.window_eq(&StructuredOperator::basis_projection(1), 64, 0.0)
    );

    // The dyadic defect is a progression tail, not a dense block: exactly
    // the projection onto the odd indices.
    let odd = StructuredOperator::tail_on(Progression::new(1, 2), Complex64::ONE);
    let dyadic_defect = id.sub(&dyadic.mul(&dyadic.adjoint())?)?;
    println!("1 - LL* = odd projection: {}", dyadic_defect.window_eq(&odd, 256, 0.0));

    // Composition is exact and order sensitive: SL doubles then steps up,
    // LS steps up then doubles.
    let sl = shift.mul(&dyadic)?;
    let ls = dyadic.mul(&shift)?;
    println!("SL e_3 = {:?}", sl.apply(3));
    println!("LS e_3 = {:?}", ls.apply(3));

    // Progressions intersect back into progressions, which is what keeps
    // products of tails representable.
    let threes = Progression::new(2, 3);
    println!("2 + 3N up to 20:        {:?}", threes.members_up_to(20));
    println!("meet with odd indices:  {:?}", threes.intersect(&Progression::new(1, 2)).members_up_to(30));

    // Windowed residuals measure honest columns only; powers of the shift
    // agree with the repeated product to machine zero.
    let cubed = shift.mul(&shift)?.mul(&shift)?;
    println!(
        "S^3 matches shift_pow(3): residual {:.1e}",
        cubed.window_residual(&StructuredOperator::shift_pow(3), 128)
    );
    Ok(())
}
