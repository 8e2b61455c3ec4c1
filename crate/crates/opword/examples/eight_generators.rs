//! The eight block unitaries that, together with block-diagonal operators,
//! generate everything this crate factors. Builds each one, checks it is
//! unitary on a window, and shows the exact relations the factorizer leans
//! on, plus the JSON wire form of a word.

use opword::generators::{reflection, triangular, GeneratorId, Letter, Word};
use opword::kernel::{BlockOperator, StructuredOperator};

fn main() -> opword::Result<()> {
    for id in GeneratorId::ALL {
        let op = id.build();
        println!(
            "generator {} ({:?}): unitarity residual {:.1e}",
            id.index(),
            id,
            op.unitarity_residual(64)?
        );
    }

    // The swap exchanges the two halves and squares to the identity.
    let swap = BlockOperator::swap();
    println!(
        "swap^2 = 1: {}",
        swap.mul(&swap)?.window_eq(&BlockOperator::identity(), 64, 0.0)
    );

    // Triangular generators are the corner scheme [[u, 1-uu*], [0, u*]];
    // reflections put u off-diagonal with Hadamard weights. The named
    // constructors agree with the generic builders on the shift.
    let shift = StructuredOperator::shift();
    println!(
        "triangular(S) == generator 1: {}",
        triangular(&shift)?.window_eq(&GeneratorId::TriangularShift.build(), 64, 0.0)
    );
    println!(
        "reflection(S) is an involution: {}",
        reflection(&shift)?
            .mul(&reflection(&shift)?)?
            .window_eq(&BlockOperator::identity(), 64, 1e-15)
    );

    // Words are flat sequences of generator letters (by index, optionally
    // inverted) and block-diagonal letters.
    let word = Word::new(vec![
        Letter::gen(GeneratorId::ReflectionShift),
        Letter::gen_inv(GeneratorId::TriangularDyadic),
        Letter::diag(
            StructuredOperator::scalar(num_complex::Complex64::new(0.0, 1.0)),
            StructuredOperator::identity(),
        )?,
    ]);
    let json = serde_json::to_string(&word)?;
    println!("word JSON: {json}");
    let back: Word = serde_json::from_str(&json)?;
    println!(
        "round trip keeps {} letters, {} of them generators",
        back.len(),
        back.core_len()
    );
    Ok(())
}
