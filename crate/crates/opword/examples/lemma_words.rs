//! Fixed words for shift powers. The triangular family reaches its target
//! in k + 1 letters; the reflection family grows by three letters every
//! second power through a two-step recursion. Each word is evaluated and
//! checked against its target on a wide window.

use opword::factorizer::verify_word;
use opword::generators::{shift_reflection_word, shift_triangular_word};

fn main() -> opword::Result<()> {
    println!("triangular powers");
    for k in 1..=8 {
        let (word, target) = shift_triangular_word(k);
        let residual = verify_word(&word, &target, 96, 1e-10)?;
        println!(
            "  k = {k}: {:>2} letters ({} generator letters), residual {:.1e}",
            word.len(),
            word.core_len(),
            residual
        );
    }
    println!("reflection powers");
    for k in 1..=8 {
        let (word, target) = shift_reflection_word(k);
        let residual = verify_word(&word, &target, 96, 1e-10)?;
        println!(
            "  k = {k}: {:>2} letters ({} generator letters), residual {:.1e}",
            word.len(),
            word.core_len(),
            residual
        );
    }
    Ok(())
}
