//! Closed-form and quadrature-based symbol error probabilities.
//!
//! [`sep_theorem3`] evaluates the average SEP of M-PSK with `n >= log2 M`
//! bits over Nakagami-m fading as `p1 + p2 - p3 + p4` (only `p2` for
//! BPSK). QPSK over Rayleigh fading has the cheaper forms in [`qpsk`], and
//! [`dvo`] turns curves into decay exponents.

pub mod dvo;
pub mod qpsk;
pub mod sep;

pub use dvo::{analytic_curve, dvo_fit, dvo_theoretical, DvoFit, DEFAULT_DVO_WINDOW_DB};
pub use qpsk::{
    asymptotic_sep_qpsk, phi_penalty, phi_penalty_at_sep, psi_penalty, sep_qpsk_rayleigh,
    sep_qpsk_rayleigh_2bit_closed,
};
pub use sep::{
    conditional_sep, conditional_sep_terms, p4_without_magnitude_factor, sep_bounds,
    sep_p_components, sep_theorem3, ConditionalTerms, SepComponents,
};

use crate::error::{Error, Result};
use crate::geometry::MAX_BITS;
use crate::quadrature::AdaptiveOptions;

/// Arguments of the average error probability `p(SNR)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepQuery {
    order: usize,
    bits: u32,
    shape: f64,
    snr: f64,
}

impl SepQuery {
    /// `order` = M, `bits` = n, `shape` = Nakagami m, `snr` linear.
    pub fn new(order: usize, bits: u32, shape: f64, snr: f64) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() || order > (1usize << MAX_BITS) {
            return Err(Error::config(format!(
                "M = {order} must be a power of two, at least 2"
            )));
        }
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::config(format!("n = {bits} must be in [1, {MAX_BITS}]")));
        }
        if !(shape.is_finite() && shape >= 0.5) {
            return Err(Error::config(format!("m = {shape} must be at least 0.5")));
        }
        if !(snr.is_finite() && snr >= 0.0) {
            return Err(Error::config(format!("snr = {snr} must be finite and >= 0")));
        }
        Ok(Self {
            order,
            bits,
            shape,
            snr,
        })
    }

    pub fn from_db(order: usize, bits: u32, shape: f64, snr_db: f64) -> Result<Self> {
        Self::new(order, bits, shape, crate::db_to_linear(snr_db))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn with_snr(&self, snr: f64) -> Result<Self> {
        Self::new(self.order, self.bits, self.shape, snr)
    }

    /// `log2 M`.
    pub fn order_bits(&self) -> u32 {
        self.order.trailing_zeros()
    }

    /// `n >= log2 M`: every symbol can be resolved by some quantizer region.
    pub fn resolvable(&self) -> bool {
        self.bits >= self.order_bits()
    }
}

/// Accuracy controls for the nested integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Relative tolerance of two-dimensional integrals; three-dimensional
    /// ones run at `100 * rel_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of panels per one-dimensional integral.
    pub max_depth: usize,
    /// Semi-infinite Gaussian axes are cut `trunc_sigma` standard deviations out.
    pub trunc_sigma: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_depth: 4000,
            trunc_sigma: 8.0,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::config(format!("rel_tol = {} must be in (0, 1)", self.rel_tol)));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::config("abs_tol must be >= 0"));
        }
        if !(self.trunc_sigma >= 6.0) {
            return Err(Error::config(format!(
                "trunc_sigma = {} must be at least 6",
                self.trunc_sigma
            )));
        }
        if self.max_depth < 8 {
            return Err(Error::config("max_depth must be at least 8"));
        }
        Ok(())
    }

    pub(crate) fn rel_tol_for(&self, dims: usize) -> f64 {
        if dims >= 3 {
            (self.rel_tol * 100.0).min(1e-3)
        } else {
            self.rel_tol
        }
    }

    /// Options for nesting level `level` (0 = outermost) of a `dims`-fold integral.
    pub(crate) fn level(&self, dims: usize, level: usize) -> AdaptiveOptions {
        AdaptiveOptions {
            rel_tol: self.rel_tol_for(dims) * 0.1f64.powi(level as i32),
            abs_tol: self.abs_tol,
            max_intervals: self.max_depth,
        }
    }
}

/// Error floor for `n < log2 M`: no detector can push the average SEP below
/// `(M - 2^n)/2^n * p_min`, where `p_min` is the probability of the least
/// likely symbol. Zero once `n >= log2 M`.
pub fn error_floor(order: usize, bits: u32, p_min: f64) -> Result<f64> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::config(format!("M = {order} must be a power of two")));
    }
    if bits == 0 {
        return Err(Error::config("n must be at least 1"));
    }
    let m = order as f64;
    if !(p_min > 0.0 && p_min <= 1.0 / m * (1.0 + 1e-12)) {
        return Err(Error::config(format!(
            "p_min = {p_min} must lie in (0, 1/M]"
        )));
    }
    if bits >= order.trailing_zeros() {
        return Ok(0.0);
    }
    let regions = (1u64 << bits) as f64;
    Ok((m - regions) / regions * p_min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_examples() {
        assert_eq!(error_floor(8, 2, 1.0 / 8.0).unwrap(), 0.125);
        assert_eq!(error_floor(16, 3, 1.0 / 16.0).unwrap(), 0.0625);
        assert_eq!(error_floor(16, 2, 1.0 / 16.0).unwrap(), 0.1875);
        assert_eq!(error_floor(8, 3, 1.0 / 8.0).unwrap(), 0.0);
        assert_eq!(error_floor(4, 7, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn floor_rejects_bad_pmin() {
        assert!(error_floor(8, 2, 0.0).is_err());
        assert!(error_floor(8, 2, 0.2).is_err());
        assert!(error_floor(6, 2, 0.1).is_err());
    }

    #[test]
    fn query_validation() {
        assert!(SepQuery::new(4, 2, 1.0, 1.0).is_ok());
        assert!(SepQuery::new(3, 2, 1.0, 1.0).is_err());
        assert!(SepQuery::new(4, 0, 1.0, 1.0).is_err());
        assert!(SepQuery::new(4, 2, 0.3, 1.0).is_err());
        assert!(SepQuery::new(4, 2, 1.0, -1.0).is_err());
        assert!(SepQuery::new(8, 2, 1.0, 1.0).unwrap().resolvable() == false);
    }

    #[test]
    fn settings_validation() {
        assert!(QuadratureSettings::default().validate().is_ok());
        let bad = QuadratureSettings {
            trunc_sigma: 5.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureSettings {
            rel_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
