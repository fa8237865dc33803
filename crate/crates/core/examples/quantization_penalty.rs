//! SEP and transmit-power penalties of coarse phase quantization for QPSK
//! over Rayleigh fading.

use phasequant::analytic::{phi_penalty_at_sep, psi_penalty};
use phasequant::curve::Resolution;
use phasequant::db_to_linear;

fn main() -> phasequant::Result<()> {
    let snr = db_to_linear(18.0);
    for bits in [2, 3, 4, 6] {
        let r = Resolution::Bits(bits);
        println!("n={bits}: psi(18 dB) = {:.3} dB", psi_penalty(snr, r)?);
    }
    for bits in [3, 4, 5] {
        let r = Resolution::Bits(bits);
        println!("n={bits}: phi(SEP 0.015) = {:.3} dB over n-1 bits", phi_penalty_at_sep(0.015, r)?);
    }
    Ok(())
}
