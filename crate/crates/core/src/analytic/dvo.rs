//! Diversity order: predicted values and log-log slope fits.

use serde::{Deserialize, Serialize};

use crate::analytic::{sep_p_components, QuadratureSettings, SepQuery};
use crate::curve::{Method, Resolution, SepCurve};
use crate::error::{Error, Result};

/// Default fitting window in dB; sampled with 5 points by the CLI.
pub const DEFAULT_DVO_WINDOW_DB: (f64, f64) = (30.0, 50.0);

/// Predicted high-SNR decay exponent: `m` once a spare bit is available,
/// `1/2` at exactly `log2 M` bits, and zero in the error-floor regime.
pub fn dvo_theoretical(order: usize, bits: u32, shape: f64) -> Result<f64> {
    let q = SepQuery::new(order, bits, shape, 1.0)?;
    let k = q.order_bits();
    Ok(if bits > k {
        shape
    } else if bits == k {
        0.5
    } else {
        0.0
    })
}

/// Least-squares line `-log10 p = slope * log10 snr + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvoFit {
    pub slope: f64,
    pub intercept: f64,
    pub snr_window: (f64, f64),
    /// Largest absolute deviation of a point from the fitted line.
    pub residual: f64,
}

/// Fits the decay exponent over the points of `curve` inside `window_db`
/// (inclusive) with positive SEP. Needs at least four such points.
pub fn dvo_fit(curve: &SepCurve, window_db: (f64, f64)) -> Result<DvoFit> {
    let (lo, hi) = window_db;
    if !(lo < hi) {
        return Err(Error::config(format!("empty fit window [{lo}, {hi}] dB")));
    }
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.snr_db >= lo && p.snr_db <= hi && p.value > 0.0 && p.value.is_finite())
        .map(|p| (p.snr_db / 10.0, -p.value.log10()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable points in [{lo}, {hi}] dB, need 4",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points share one SNR".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Ok(DvoFit {
        slope,
        intercept,
        snr_window: window_db,
        residual,
    })
}

/// Quadrature SEP curve over an SNR grid in dB; the uncertainty column holds
/// the quadrature error estimate.
pub fn analytic_curve(
    order: usize,
    bits: u32,
    shape: f64,
    snr_db: &[f64],
    s: &QuadratureSettings,
) -> Result<SepCurve> {
    let mut curve = SepCurve::new(order, Resolution::Bits(bits), shape, Method::Theorem3);
    for &db in snr_db {
        let q = SepQuery::from_db(order, bits, shape, db)?;
        let c = sep_p_components(&q, s)?;
        let value = if order == 2 { c.p2.clamp(0.0, 1.0) } else { c.total() };
        curve.push(db, value, c.abs_error);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theoretical_regimes() {
        assert_eq!(dvo_theoretical(4, 2, 1.7).unwrap(), 0.5);
        assert_eq!(dvo_theoretical(4, 3, 2.0).unwrap(), 2.0);
        assert_eq!(dvo_theoretical(8, 2, 1.0).unwrap(), 0.0);
        assert_eq!(dvo_theoretical(2, 1, 3.0).unwrap(), 0.5);
    }

    #[test]
    fn fit_recovers_power_law() {
        let mut c = SepCurve::new(4, Resolution::Bits(2), 1.0, Method::QpskClosed);
        for db in [30.0, 35.0, 40.0, 45.0, 50.0] {
            c.push(db, 3.0 * 10f64.powf(-1.5 * db / 10.0), 0.0);
        }
        let f = dvo_fit(&c, DEFAULT_DVO_WINDOW_DB).unwrap();
        assert!((f.slope - 1.5).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn flat_curve_and_too_few_points() {
        let mut c = SepCurve::new(8, Resolution::Bits(2), 1.0, Method::MonteCarlo);
        for db in [30.0, 35.0, 40.0, 45.0, 50.0] {
            c.push(db, 0.5, 0.0);
        }
        assert!(dvo_fit(&c, (30.0, 50.0)).unwrap().slope.abs() < 1e-12);
        assert!(matches!(dvo_fit(&c, (30.0, 40.0)), Err(Error::InsufficientData(_))));
    }
}
