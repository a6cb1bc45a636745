//! Log-volume of the radius-`r0` ball against the codebook-size bounds, which
//! grow like `n log n`.

use dtpc_di::analysis::{achievable_log_size, converse_log_size_cap, sphere_log_volume};
use dtpc_di::codebook::packing_radius;

fn main() -> dtpc_di::Result<()> {
    let (amplitude, a, b, kappa) = (1.0, 1.0, 0.3, 0.0);
    println!(
        "{:>7} {:>12} {:>14} {:>14} {:>10}",
        "n", "log Vol(r0)", "achievable", "converse", "/(n log n)"
    );
    for k in [4, 6, 8, 10, 12, 14, 16] {
        let n = 1usize << k;
        let (_, r0) = packing_radius(n, kappa, a, b)?;
        let vol = sphere_log_volume(n, r0)?;
        let lo = achievable_log_size(n, amplitude, a, b, kappa)?;
        let hi = converse_log_size_cap(n, kappa, b, amplitude, 1.0, 1.0)?;
        let nlogn = n as f64 * (n as f64).ln();
        println!(
            "{n:>7} {vol:>12.2} {lo:>14.2} {hi:>14.2} {:>10.4}",
            lo / nlogn
        );
    }
    Ok(())
}
