//! Monte Carlo type-I and type-II error rates for one codebook, next to the
//! Chebyshev bounds.

use dtpc_di::montecarlo::{estimate_metric_moments, estimate_type1, estimate_type2};
use dtpc_di::{ChannelParams, DecoderConfig, GreedyPacker, PackingParams};

fn main() -> dtpc_di::Result<()> {
    let n = 128;
    let channel = ChannelParams::new(vec![0.8, 0.2], 0.5)?;
    let params = PackingParams::for_taps(n, 8.0, 4.0, 0.3, channel.taps())?;
    let cb = GreedyPacker::new(params.clone())
        .max_codewords(16)
        .build(5)?;
    let cfg = DecoderConfig::new(1.0, channel.rho0(), params.theta_n())?;

    let t1 = estimate_type1(&cb, 0, &channel, &cfg, 20_000, 1)?;
    println!(
        "type I : p = {:.4} [{:.4}, {:.4}]  bound {:.3e}",
        t1.p_hat, t1.ci_low, t1.ci_high, t1.analytic_bound
    );
    let (i, j, d) = cb.closest_pair().expect("M >= 2");
    let t2 = estimate_type2(&cb, i, j, &channel, &cfg, 20_000, 2)?;
    println!(
        "type II: p = {:.4} [{:.4}, {:.4}]  bound {:.3e}  (pair {i},{j} at distance {d:.3})",
        t2.p_hat, t2.ci_low, t2.ci_high, t2.analytic_bound
    );

    let m = estimate_metric_moments(&cb, 0, &channel, 20_000, 3)?;
    println!(
        "T under the true message: mean {:+.5} (se {:.5}), var {:.5}",
        m.mean, m.se_mean, m.var
    );
    Ok(())
}
