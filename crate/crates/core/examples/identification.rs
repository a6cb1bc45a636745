//! Sends one codeword and asks the distance decoder about every message.

use dtpc_di::channel::sample_output;
use dtpc_di::decoder::{decoding_metric, identify};
use dtpc_di::{ChannelParams, DecoderConfig, GreedyPacker, PackingParams};

fn main() -> dtpc_di::Result<()> {
    let n = 64;
    let channel = ChannelParams::new(vec![0.8, 0.2], 0.5)?;
    let params = PackingParams::for_taps(n, 8.0, 4.0, 0.3, channel.taps())?;
    let cb = GreedyPacker::new(params.clone())
        .max_codewords(12)
        .build(3)?;
    let cfg = DecoderConfig::new(1.0, channel.rho0(), params.theta_n())?;
    println!("M = {}, tau_n = {:.4}", cb.len(), cfg.tau_n());

    let sent = 0;
    let y = sample_output(cb.codeword(sent)?, &channel, 99)?;
    for j in 0..cb.len() {
        let t = decoding_metric(&y, cb.codeword(j)?, &channel)?;
        let yes = identify(&y, cb.codeword(j)?, &channel, &cfg)?;
        println!(
            "message {j:2}: T = {t:+9.4}  {}",
            if yes { "accept" } else { "reject" }
        );
    }

    // A single draw is noisy; tally a few hundred.
    let (mut true_hits, mut false_hits) = (0, 0);
    for seed in 0..200 {
        let y = sample_output(cb.codeword(sent)?, &channel, 1000 + seed)?;
        for j in 0..cb.len() {
            if identify(&y, cb.codeword(j)?, &channel, &cfg)? {
                if j == sent {
                    true_hits += 1;
                } else {
                    false_hits += 1;
                }
            }
        }
    }
    println!(
        "200 transmissions: sent message accepted {true_hits} times, others {false_hits} times"
    );
    Ok(())
}
