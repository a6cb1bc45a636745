//! Closed-form rate bounds and the ISI-rate trade-off at a fixed blocklength.

use dtpc_di::analysis::{
    argmax_reff_lower, capacity_bounds, kappa_sweep, BoundInputs, BoundsReport,
};

fn main() -> dtpc_di::Result<()> {
    for kappa in [0.0, 0.25, 0.5, 0.75] {
        let (lo, hi) = capacity_bounds(kappa)?;
        println!("kappa {kappa:.2}: {lo:.4} <= C <= {hi:.4}");
    }

    let points = kappa_sweep(1000, 1.0, 0.0, 0.99, 0.01)?;
    if let Some(best) = argmax_reff_lower(&points) {
        let p = &points[best];
        println!(
            "n = 1000: effective rate lower bound peaks at kappa = {:.2} ({:.4})",
            p.kappa, p.reff_lower
        );
    }

    let report = BoundsReport::evaluate(BoundInputs {
        n: 256,
        kappa: 0.2,
        amplitude: 8.0,
        p_max: 8.0,
        lambda: 0.5,
        rho0: 0.8,
        ..BoundInputs::default()
    })?;
    for (key, value) in report.records() {
        println!("{key:>20} {value:.6e}");
    }
    Ok(())
}
