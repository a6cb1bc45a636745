//! Runs a reduced version of the demo sweep and prints the CSV table.

use dtpc_di::montecarlo::{run_sweep, EstimateKind, ExperimentSpec};

fn main() -> dtpc_di::Result<()> {
    let spec = ExperimentSpec {
        n_grid: vec![16, 32, 64],
        trials: 2000,
        pair_budget: 8,
        message_budget: 4,
        max_codewords: Some(64),
        ..ExperimentSpec::demo()
    };
    let table = run_sweep(&spec)?;
    print!("{}", table.to_csv());
    println!(
        "type I non-increasing: {}, type II non-increasing: {}, bounds dominate: {}",
        table.non_increasing(EstimateKind::Type1),
        table.non_increasing(EstimateKind::Type2),
        table.all_dominated()
    );
    Ok(())
}
