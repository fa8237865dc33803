//! Maximum likelihood decisions for QPSK with two and three bits, showing
//! how the spare bit moves the rotated symbols away from region edges.

use num_complex::Complex64;
use phasequant::detector::{ml_detect_geometric, ml_detect_oracle, DetectionContext};
use phasequant::geometry::{ModulationSpec, QuantizerSpec};

fn main() -> phasequant::Result<()> {
    let qpsk = ModulationSpec::new(4)?;
    let h = Complex64::from_polar(0.9, 40f64.to_radians());
    let snr = 10.0;

    for bits in [2, 3] {
        let q = QuantizerSpec::new(bits)?;
        let ctx = DetectionContext::new(&qpsk, q, h, snr)?;
        println!("n = {bits}, channel phase 40 deg, SNR {snr}");
        for k in 0..q.region_count() {
            let geometric = ml_detect_geometric(&ctx, k)?;
            let oracle = ml_detect_oracle(&ctx, k, 1e-10)?;
            let lik: Vec<String> = oracle.likelihoods.iter().map(|p| format!("{p:.4}")).collect();
            println!("  k={k}: decide x{geometric} (oracle x{})  P(k|x) = [{}]", oracle.symbol, lik.join(", "));
        }
    }
    Ok(())
}
