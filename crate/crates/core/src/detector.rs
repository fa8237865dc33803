//! Maximum likelihood detection from a quantized phase observation.
//!
//! With equiprobable M-PSK symbols and a known channel `h`, the likelihood
//! of quantizer output `k` given symbol `x` is the mass of
//! `CN(sqrt(snr) h x, 1)` on cone `R_k`. That mass is largest for the
//! rotated symbol closest to the bisecting half-line `H_k`, so the detector
//! reduces to a nearest-ray search ([`ml_detect_geometric`]).
//! [`ml_detect_oracle`] evaluates the likelihoods themselves by quadrature
//! and serves as the reference the geometric rule is checked against.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{phase, wrap_phase, ConeRegion, ModulationSpec, QuantizerSpec};
use crate::quadrature::{integrate_breaks, AdaptiveOptions};
use crate::special::erfc;

/// Default relative tolerance of the likelihood quadrature.
pub const DEFAULT_ORACLE_TOL: f64 = 1e-9;

/// Everything the receiver knows when it makes a decision.
#[derive(Debug, Clone, Copy)]
pub struct DetectionContext<'a> {
    modulation: &'a ModulationSpec,
    quantizer: QuantizerSpec,
    h: Complex64,
    h_phase: f64,
    snr: f64,
}

impl<'a> DetectionContext<'a> {
    pub fn new(
        modulation: &'a ModulationSpec,
        quantizer: QuantizerSpec,
        h: Complex64,
        snr: f64,
    ) -> Result<Self> {
        if !(snr >= 0.0 && snr.is_finite()) {
            return Err(Error::Domain(format!("snr = {snr} must be finite and >= 0")));
        }
        let h_phase = phase(h)?;
        Ok(Self {
            modulation,
            quantizer,
            h,
            h_phase,
            snr,
        })
    }

    pub fn modulation(&self) -> &ModulationSpec {
        self.modulation
    }

    pub fn quantizer(&self) -> QuantizerSpec {
        self.quantizer
    }

    pub fn channel(&self) -> Complex64 {
        self.h
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// Noise-free received point `sqrt(snr) h x_i`.
    pub fn rotated_symbol(&self, i: usize) -> Result<Complex64> {
        Ok(self.snr.sqrt() * self.h * self.modulation.symbol(i)?)
    }

    fn magnitude(&self) -> f64 {
        self.snr.sqrt() * self.h.norm()
    }
}

/// Distance from `z` to the half-line from the origin at angle `ray`.
///
/// The foot of the perpendicular lies on the half-line only when the angular
/// offset is at most `π/2`; otherwise the origin is the nearest point.
pub fn ray_distance(z: Complex64, ray: f64) -> f64 {
    let r = z.norm();
    if r == 0.0 {
        return 0.0;
    }
    let delta = wrap_phase(z.im.atan2(z.re) - ray);
    r * offset_factor(delta)
}

fn offset_factor(delta: f64) -> f64 {
    if delta.abs() <= FRAC_PI_2 {
        delta.sin().abs()
    } else {
        1.0
    }
}

/// Distances from every rotated symbol to the bisector `H_k`.
pub fn ray_distances(ctx: &DetectionContext<'_>, k: usize) -> Result<Vec<f64>> {
    let ray = ctx.quantizer.bisector_angle(k)?;
    let r = ctx.magnitude();
    Ok(ctx
        .modulation
        .angles()
        .iter()
        .map(|&a| r * offset_factor(wrap_phase(ctx.h_phase + a - ray)))
        .collect())
}

/// Symbol whose rotated image `sqrt(snr) h x_i` is nearest to `H_k`,
/// ties resolved to the smallest index.
pub fn ml_detect_geometric(ctx: &DetectionContext<'_>, k: usize) -> Result<usize> {
    let ray = ctx.quantizer.bisector_angle(k)?;
    if ctx.magnitude() == 0.0 {
        return Ok(0);
    }
    // All rotated symbols share the magnitude sqrt(snr)|h|, so comparing the
    // angular factor alone gives the same argmin.
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (i, &a) in ctx.modulation.angles().iter().enumerate() {
        let score = offset_factor(wrap_phase(ctx.h_phase + a - ray));
        if score < best_score {
            best = i;
            best_score = score;
        }
    }
    Ok(best)
}

/// Likelihood evaluation of the decision for one quantizer output.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDecision {
    /// Index of the largest likelihood (smallest index among exact ties).
    pub symbol: usize,
    /// `P(Q(Y) = k | X = x_i, H = h)` for every symbol.
    pub likelihoods: Vec<f64>,
    /// Quadrature error estimate of each likelihood.
    pub errors: Vec<f64>,
    /// The two largest likelihoods are within `10 * tol` (relative) of each other.
    pub near_tie: bool,
}

/// Mass of `CN(mu, 1)` on a cone.
///
/// The radial integral is done in closed form, leaving the angular integral
/// `(1/π) ∫ [e^{-|μ|²}/2 + (√π/2) a e^{-b²} erfc(-a)] dφ` with
/// `a = |μ| cos(φ - Arg μ)` and `b = |μ| sin(φ - Arg μ)`.
pub fn cone_probability(mu: Complex64, cone: &ConeRegion, rel_tol: f64) -> Result<(f64, f64)> {
    let rho = mu.norm();
    let mu_phase = if rho > 0.0 { mu.im.atan2(mu.re) } else { 0.0 };
    let base = 0.5 * (-rho * rho).exp();
    let half_sqrt_pi = 0.5 * PI.sqrt();
    let integrand = |phi: f64| -> Result<f64> {
        let d = phi - mu_phase;
        let a = rho * d.cos();
        let b = rho * d.sin();
        Ok((base + half_sqrt_pi * a * (-b * b).exp() * erfc(-a)) / PI)
    };
    let lo = cone.lower_angle();
    let hi = cone.upper_angle();
    let mut breaks = vec![lo, hi];
    if rho > 0.0 {
        // Split at the mean direction and at the antipode when they fall inside.
        for target in [mu_phase, mu_phase + PI] {
            let off = (target - lo).rem_euclid(2.0 * PI);
            if off > 0.0 && off < hi - lo {
                breaks.push(lo + off);
            }
        }
        breaks.sort_by(f64::total_cmp);
    }
    let opts = AdaptiveOptions {
        rel_tol,
        abs_tol: 0.0,
        max_intervals: 500,
    };
    let r = integrate_breaks(integrand, &breaks, &opts)?;
    Ok((r.value, r.abs_error))
}

/// Brute-force maximum likelihood decision from the cone likelihoods.
pub fn ml_detect_oracle(ctx: &DetectionContext<'_>, k: usize, tol: f64) -> Result<OracleDecision> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("oracle tolerance {tol} must be positive")));
    }
    let cone = ctx.quantizer.region(k)?;
    let mut likelihoods = Vec::with_capacity(ctx.modulation.order());
    let mut errors = Vec::with_capacity(ctx.modulation.order());
    for i in 0..ctx.modulation.order() {
        let (p, e) = cone_probability(ctx.rotated_symbol(i)?, &cone, tol)?;
        likelihoods.push(p);
        errors.push(e);
    }
    let mut symbol = 0;
    for (i, &p) in likelihoods.iter().enumerate() {
        if p > likelihoods[symbol] {
            symbol = i;
        }
    }
    let top = likelihoods[symbol];
    let runner_up = likelihoods
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != symbol)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    let near_tie = top <= 0.0 || top - runner_up <= 10.0 * tol * top;
    Ok(OracleDecision {
        symbol,
        likelihoods,
        errors,
        near_tie,
    })
}
