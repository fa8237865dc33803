//! Quadrature SEP with its four components and the lower/upper bounds.

use phasequant::analytic::{sep_bounds, sep_p_components, sep_qpsk_rayleigh_2bit_closed, QuadratureSettings, SepQuery};
use phasequant::db_to_linear;

fn main() -> phasequant::Result<()> {
    let s = QuadratureSettings::default();
    println!("{:>5} {:>4} {:>4} {:>6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}", "M", "n", "m", "dB", "p1", "p2", "p3", "p4", "lower", "upper");
    for (order, bits, m) in [(4usize, 2u32, 1.0), (4, 3, 2.0), (8, 3, 1.0), (8, 4, 0.5)] {
        for db in [0.0, 10.0, 20.0, 30.0] {
            let q = SepQuery::from_db(order, bits, m, db)?;
            let c = sep_p_components(&q, &s)?;
            let (l, u) = if order >= 4 { sep_bounds(&q, &s)? } else { (f64::NAN, f64::NAN) };
            println!(
                "{order:>5} {bits:>4} {m:>4} {db:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}   p = {:.4e}",
                c.p1, c.p2, c.p3, c.p4, l, u, c.total()
            );
        }
    }
    println!("\nQPSK, 2 bits, Rayleigh at 0 dB, closed form: {}", sep_qpsk_rayleigh_2bit_closed(db_to_linear(0.0)));
    Ok(())
}
