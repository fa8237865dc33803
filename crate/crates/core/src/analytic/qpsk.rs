//! QPSK over Rayleigh fading: arctan forms, high-SNR asymptotics and the
//! two quantization penalties.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::analytic::QuadratureSettings;
use crate::curve::Resolution;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

fn check_snr(snr: f64, strict: bool) -> Result<()> {
    let ok = snr.is_finite() && if strict { snr > 0.0 } else { snr >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("snr = {snr} out of range")))
    }
}

/// `tan(π / 2^(n-1))`, infinite for `n = 2`.
fn sector_tan(bits: u32) -> f64 {
    if bits == 2 {
        f64::INFINITY
    } else {
        (PI / (1u64 << (bits - 1)) as f64).tan()
    }
}

/// `atan(x t)` with `t` possibly infinite and `x >= 0`.
fn atan_scaled(x: f64, t: f64) -> f64 {
    if t.is_infinite() {
        if x > 0.0 {
            FRAC_PI_2
        } else {
            0.0
        }
    } else {
        (x * t).atan()
    }
}

/// Average SEP of QPSK with `n >= 2` bits over Rayleigh fading, via the
/// Rayleigh specialization with the `θ` integral done in closed form.
pub fn sep_qpsk_rayleigh(snr: f64, bits: u32, s: &QuadratureSettings) -> Result<f64> {
    check_snr(snr, false)?;
    if bits < 2 || bits > crate::geometry::MAX_BITS {
        return Err(Error::config(format!("QPSK needs n >= 2 bits, got {bits}")));
    }
    s.validate()?;
    let t = sector_tan(bits);
    let scale = (1u64 << bits) as f64;

    let single = integrate(
        |beta: f64| {
            let sb = beta.sin();
            let root = (snr + sb * sb).sqrt();
            if root == 0.0 {
                return Ok(0.0);
            }
            let arg = 2.0 * sb * root / (snr + 2.0 * sb * sb);
            Ok(sb / root * atan_scaled(arg, t))
        },
        0.0,
        FRAC_PI_2,
        &s.level(2, 0),
    )?;

    let inner_opts = s.level(2, 1);
    let double = integrate(
        |gamma: f64| {
            let sg = gamma.sin();
            let rg = snr + sg * sg;
            let r = integrate(
                |beta: f64| {
                    let sb = beta.sin();
                    let rb = snr + sb * sb;
                    let prod = rb * rg;
                    if prod == 0.0 {
                        return Ok(0.0);
                    }
                    let num = 2.0 * sb * sg * prod.sqrt();
                    let den = snr * (sb * sb + sg * sg) + 2.0 * sb * sb * sg * sg;
                    Ok((sb * sb * sg * sg / prod).sqrt() * atan_scaled(num / den, t))
                },
                0.0,
                FRAC_PI_2,
                &inner_opts,
            )?;
            Ok(r.value)
        },
        0.0,
        FRAC_PI_2,
        &s.level(2, 0),
    )?;

    let p = scale / (PI * PI) * single.value - 0.5 * scale / PI.powi(3) * double.value;
    Ok(p.clamp(0.0, 1.0))
}

/// `(2/π) atan(1/√snr) - ((1/π) atan(1/√snr))²` for `M = 4`, `n = 2`, `m = 1`.
pub fn sep_qpsk_rayleigh_2bit_closed(snr: f64) -> f64 {
    let a = (1.0 / snr.sqrt()).atan() / PI;
    2.0 * a - a * a
}

/// `(4π - 1)/π²`: coefficient of `1/snr` in the unquantized asymptote.
const UNQUANTIZED_COEFF: f64 = (4.0 * PI - 1.0) / (PI * PI);

/// Leading high-SNR term of the QPSK Rayleigh SEP.
pub fn asymptotic_sep_qpsk(snr: f64, resolution: Resolution) -> Result<f64> {
    check_snr(snr, true)?;
    match resolution {
        Resolution::Infinite => Ok(UNQUANTIZED_COEFF / snr),
        Resolution::Bits(2) => Ok(2.0 / PI / snr.sqrt()),
        Resolution::Bits(n) if (3..=crate::geometry::MAX_BITS).contains(&n) => {
            let half = (1u64 << (n - 1)) as f64;
            Ok(half * (4.0 * PI - 1.0) / PI.powi(3) * sector_tan(n) / snr)
        }
        Resolution::Bits(n) => Err(Error::config(format!("asymptote needs n >= 2, got {n}"))),
    }
}

/// Ψ: dB increase of the asymptotic SEP of `n` bits over unquantized phase.
pub fn psi_penalty(snr: f64, resolution: Resolution) -> Result<f64> {
    check_snr(snr, true)?;
    match resolution {
        Resolution::Infinite => Ok(0.0),
        Resolution::Bits(2) => Ok(10.0 * (2.0 * PI / (4.0 * PI - 1.0) * snr.sqrt()).log10()),
        Resolution::Bits(n) if (3..=crate::geometry::MAX_BITS).contains(&n) => {
            let half = (1u64 << (n - 1)) as f64;
            Ok(10.0 * (half / PI * sector_tan(n)).log10())
        }
        Resolution::Bits(n) => Err(Error::config(format!("Ψ needs n >= 2, got {n}"))),
    }
}

/// Φ: dB of extra power `n - 1` bits need to match the SEP of `n` bits.
/// `snr_2` is the 2-bit SNR reaching the target SEP; only `n = 3` uses it.
pub fn phi_penalty(snr_2: f64, resolution: Resolution) -> Result<f64> {
    match resolution {
        Resolution::Infinite => Ok(0.0),
        Resolution::Bits(3) => {
            check_snr(snr_2, true)?;
            Ok(10.0 * (PI * PI / (2.0 * (4.0 * PI - 1.0)) * snr_2.sqrt()).log10())
        }
        Resolution::Bits(n) if (4..=crate::geometry::MAX_BITS).contains(&n) => {
            let t_coarse = (PI / (1u64 << (n - 2)) as f64).tan();
            let t_fine = (PI / (1u64 << (n - 1)) as f64).tan();
            Ok(10.0 * (0.5 * t_coarse / t_fine).log10())
        }
        Resolution::Bits(n) => Err(Error::config(format!("Φ needs n >= 3, got {n}"))),
    }
}

/// Φ at a target SEP, inverting the 2-bit asymptote `sep = (2/π) snr^(-1/2)`.
pub fn phi_penalty_at_sep(sep: f64, resolution: Resolution) -> Result<f64> {
    if !(sep > 0.0 && sep < 1.0) {
        return Err(Error::Domain(format!("target SEP {sep} outside (0, 1)")));
    }
    let snr_2 = (2.0 / (PI * sep)).powi(2);
    phi_penalty(snr_2, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(sep_qpsk_rayleigh_2bit_closed(1.0), 0.4375);
        assert!((sep_qpsk_rayleigh_2bit_closed(1e-14) - 0.75).abs() < 1e-6);
        assert_eq!(sep_qpsk_rayleigh_2bit_closed(0.0), 0.75);
    }

    #[test]
    fn arctan_form_pure_noise() {
        let s = QuadratureSettings::default();
        for n in 2..7 {
            assert!((sep_qpsk_rayleigh(0.0, n, &s).unwrap() - 0.75).abs() < 1e-9);
        }
    }

    #[test]
    fn arctan_form_two_bits_matches_closed() {
        let s = QuadratureSettings::default();
        for snr in [0.3, 1.0, 10.0, 1e3] {
            let a = sep_qpsk_rayleigh(snr, 2, &s).unwrap();
            assert!((a - sep_qpsk_rayleigh_2bit_closed(snr)).abs() < 1e-8, "{snr}");
        }
    }

    #[test]
    fn penalties() {
        let psi = psi_penalty(crate::db_to_linear(18.0), Resolution::Bits(2)).unwrap();
        assert!((psi - 6.35).abs() < 0.01, "{psi}");
        let psi3 = psi_penalty(1.0, Resolution::Bits(3)).unwrap();
        assert!((psi3 - 10.0 * (4.0 / PI).log10()).abs() < 1e-12);
        assert!(psi_penalty(1.0, Resolution::Bits(30)).unwrap().abs() < 1e-6);
        let phi = phi_penalty_at_sep(0.015, Resolution::Bits(4)).unwrap();
        assert!((phi - 10.0 * (0.5 / (PI / 8.0).tan()).log10()).abs() < 1e-12);
        assert!(phi_penalty(1.0, Resolution::Bits(30)).unwrap().abs() < 1e-6);
        assert!(phi_penalty(1.0, Resolution::Bits(2)).is_err());
    }

    #[test]
    fn asymptote_values() {
        let a = asymptotic_sep_qpsk(1e4, Resolution::Bits(2)).unwrap();
        assert!((a - 2.0 / PI * 1e-2).abs() < 1e-15);
        // tan(π/2^(n-1)) -> π/2^(n-1) reproduces the unquantized coefficient.
        let fine = asymptotic_sep_qpsk(1.0, Resolution::Bits(25)).unwrap();
        assert!((fine / UNQUANTIZED_COEFF - 1.0).abs() < 1e-12);
        assert!(asymptotic_sep_qpsk(0.0, Resolution::Bits(3)).is_err());
    }
}
