//! Symbol error probability of M-PSK links whose receiver only sees an
//! n-bit quantization of the received phase.
//!
//! The crate covers the whole chain from constellation and quantizer
//! geometry ([`geometry`]), Nakagami-m fading and AWGN generation
//! ([`channel`]), the maximum likelihood detector for quantized
//! observations ([`detector`]), quadrature-based and closed-form error
//! probabilities ([`analytic`]), seeded Monte Carlo estimation
//! ([`montecarlo`]) and the file-producing command layer ([`cli`]).
//!
//! ```
//! use phasequant::analytic::{sep_qpsk_rayleigh_2bit_closed, sep_theorem3, QuadratureSettings, SepQuery};
//!
//! let q = SepQuery::new(4, 2, 1.0, 1.0).unwrap();
//! let p = sep_theorem3(&q, &QuadratureSettings::default()).unwrap();
//! assert!((p - sep_qpsk_rayleigh_2bit_closed(1.0)).abs() < 1e-6);
//! ```

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod curve;
pub mod detector;
pub mod error;
pub mod geometry;
pub mod montecarlo;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
