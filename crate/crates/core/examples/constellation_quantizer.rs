//! Constellation angles, quantizer cones and the channel partition.

use num_complex::Complex64;
use phasequant::geometry::{build_constellation, QuantizerSpec};

fn main() -> phasequant::Result<()> {
    let psk = build_constellation(8)?;
    println!("8-PSK angles (deg):");
    for (i, a) in psk.angles().iter().enumerate() {
        println!("  x{i}: {:7.2}", a.to_degrees());
    }

    let q = QuantizerSpec::new(3)?;
    println!("\n3-bit quantizer, sector width {:.1} deg", q.sector_width().to_degrees());
    for k in 0..q.region_count() {
        let r = q.region(k)?;
        println!(
            "  R{k}: [{:7.2}, {:7.2})  bisector {:7.2}",
            r.lower_angle().to_degrees(),
            r.upper_angle().to_degrees(),
            q.bisector_angle(k)?.to_degrees()
        );
    }

    for deg in [5.0f64, 40.0, 100.0, -170.0] {
        let y = Complex64::from_polar(2.0, deg.to_radians());
        println!(
            "phase {deg:6.1} deg -> region {}, channel cell D{}",
            q.quantize(y)?,
            q.fading_partition_index(y)?
        );
    }
    Ok(())
}
