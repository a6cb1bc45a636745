//! Draws a few outputs of the ISI Poisson channel and scores them under two
//! candidate inputs.

use dtpc_di::channel::{convolved_means, sample_output, transition_log_prob};
use dtpc_di::ChannelParams;

fn main() -> dtpc_di::Result<()> {
    let params = ChannelParams::new(vec![0.8, 0.2], 0.5)?;
    let sent = [3.0, 0.0, 1.5, 2.0];
    let other = [0.0, 3.0, 1.5, 2.0];

    println!("means: {:?}", convolved_means(&sent, &params)?);
    for seed in 0..4 {
        let y = sample_output(&sent, &params, seed)?;
        let ll_sent = transition_log_prob(&y, &sent, &params)?;
        let ll_other = transition_log_prob(&y, &other, &params)?;
        println!(
            "y={:?}  log W(y|sent)={ll_sent:.3}  log W(y|other)={ll_other:.3}",
            y.as_slice()
        );
    }
    Ok(())
}
