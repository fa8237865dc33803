//! SEP saturates when the quantizer has fewer cones than the constellation
//! has points.

use phasequant::analytic::{error_floor, SepQuery};
use phasequant::montecarlo::{simulate_sep, SimPlan};

fn main() -> phasequant::Result<()> {
    for (order, bits) in [(8usize, 2u32), (16, 2), (16, 3)] {
        let floor = error_floor(order, bits, 1.0 / order as f64)?;
        print!("M={order:>2} n={bits}: floor {floor:.4}, simulated");
        for db in [10.0, 25.0, 40.0] {
            let e = simulate_sep(&SimPlan::fixed(SepQuery::from_db(order, bits, 1.0, db)?, 200_000, 1))?;
            print!("  {db} dB {:.4}", e.p_hat);
        }
        println!();
    }
    Ok(())
}
