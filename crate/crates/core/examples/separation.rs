//! The pairwise separation that any good identification code must have,
//! checked on a packed codebook and on one with a repeated codeword.

use dtpc_di::analysis::check_lemma_separation;
use dtpc_di::{ChannelParams, Codebook, GreedyPacker, PackingParams};

fn main() -> dtpc_di::Result<()> {
    let channel = ChannelParams::new(vec![0.8, 0.2], 0.5)?;
    let params = PackingParams::new(16, 4.0, 1.0, 0.3, 0.0)?;
    let cb = GreedyPacker::new(params.clone())
        .max_codewords(20)
        .build(8)?;

    let report = check_lemma_separation(&cb, &channel, 0.3, 4.0)?;
    let worst = report.worst_pair().expect("M >= 2");
    println!(
        "M = {}, theta' = {:.4}, worst margin {:.4} at ({}, {}), passed: {}",
        cb.len(),
        report.theta_prime,
        worst.margin_message,
        worst.i,
        worst.j,
        report.passed_message
    );

    let mut words = cb.codewords().to_vec();
    words.push(words[0].clone());
    let dup = Codebook::from_codewords(words, params, cb.seed())?;
    let report = check_lemma_separation(&dup, &channel, 0.3, 4.0)?;
    println!(
        "with a repeated codeword: {} failing pairs",
        report.failing_pairs().count()
    );
    Ok(())
}
