//! End to end: draw a seeded random block unitary, factor it into a word
//! over the eight generators and block-diagonal letters, walk the stage
//! trace, and verify the word reproduces the input on a window.

use opword::factorizer::{factorize, verify_word, FactorizeOpts};
use opword::harness::gen_random_input;

fn main() -> opword::Result<()> {
    let input = gen_random_input(42, 8);
    let (word, trace) = factorize(&input, &FactorizeOpts::default())?;

    println!(
        "word length {} ({} generator letters), flipped: {}, swapped: {}",
        word.len(),
        word.core_len(),
        trace.flipped,
        trace.swapped
    );
    for stage in &trace.stages {
        let worst = stage.residuals.iter().map(|(_, v)| *v).fold(0.0f64, f64::max);
        println!(
            "  {:<22} letters so far {:>2}, worst residual {:.1e}",
            stage.name, stage.word_len_after, worst
        );
        for flag in &stage.flags {
            println!("    note: {flag}");
        }
    }
    println!("reconstruction residual {:.2e}", trace.final_residual);

    let residual = verify_word(&word, &input, 64, 1e-8)?;
    println!("verified against the input on window 64: residual {:.2e}", residual);

    // Letters serialize to the same JSON the command line tools exchange.
    println!("first letter: {}", serde_json::to_string(&word.letters[0])?);
    Ok(())
}
