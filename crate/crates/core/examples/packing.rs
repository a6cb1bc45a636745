//! Builds a greedy sphere packing and checks it is a valid saturated codebook.

use dtpc_di::codebook::verify_packing;
use dtpc_di::{GreedyPacker, PackingParams};

fn main() -> dtpc_di::Result<()> {
    let params = PackingParams::new(6, 4.0, 1.0, 0.3, 0.0)?;
    println!("theta_n = {:.4}, r0 = {:.4}", params.theta_n(), params.r0());

    let cb = GreedyPacker::new(params)
        .max_rejections(200_000)
        .build(11)?;
    println!(
        "M = {}, rate = {:.3} bits/symbol",
        cb.len(),
        cb.rate().unwrap_or(0.0)
    );
    if let Some((i, j, d)) = cb.closest_pair() {
        println!("closest pair ({i}, {j}) at {d:.4}");
    }

    let report = verify_packing(&cb, 100_000, 1)?;
    println!(
        "separation {} linf {} average {} covering {:.5} log2 density {:.2}",
        report.separation_ok,
        report.linf_ok,
        report.average_ok,
        report.covering_fraction,
        report.log2_density
    );
    println!("first lines of the text format:");
    for line in cb.to_text().lines().take(3) {
        println!("  {line}");
    }
    Ok(())
}
