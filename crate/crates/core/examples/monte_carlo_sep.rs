//! Seeded Monte Carlo SEP with the relative-precision stopping rule.

use phasequant::analytic::{sep_theorem3, QuadratureSettings, SepQuery};
use phasequant::montecarlo::{simulate_sep, SimPlan};

fn main() -> phasequant::Result<()> {
    let s = QuadratureSettings::default();
    for db in [0.0, 10.0, 20.0] {
        let q = SepQuery::from_db(8, 4, 1.0, db)?;
        let plan = SimPlan {
            max_trials: 10_000_000,
            target_rel_ci: 0.01,
            ..SimPlan::new(q, 7)
        };
        let e = simulate_sep(&plan)?;
        let exact = sep_theorem3(&q, &s)?;
        println!(
            "8-PSK n=4 m=1 {db:>4} dB: p_hat = {:.5e} ± {:.1e} after {} trials; quadrature {exact:.5e}",
            e.p_hat, e.stderr, e.trials
        );
    }
    Ok(())
}
