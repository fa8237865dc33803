//! Fitted high-SNR slopes against the predicted diversity order.

use phasequant::analytic::{analytic_curve, dvo_fit, dvo_theoretical, QuadratureSettings, DEFAULT_DVO_WINDOW_DB};

fn main() -> phasequant::Result<()> {
    let s = QuadratureSettings::default();
    let grid = [30.0, 35.0, 40.0, 45.0, 50.0];
    for (order, bits, m) in [(4usize, 2u32, 1.0), (4, 3, 1.0), (4, 3, 2.0), (8, 3, 1.0), (8, 4, 1.0)] {
        let curve = analytic_curve(order, bits, m, &grid, &s)?;
        let fit = dvo_fit(&curve, DEFAULT_DVO_WINDOW_DB)?;
        println!(
            "M={order} n={bits} m={m}: fitted {:.3}, predicted {}",
            fit.slope,
            dvo_theoretical(order, bits, m)?
        );
    }
    Ok(())
}
