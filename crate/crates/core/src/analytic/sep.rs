//! Average SEP of M-PSK with `n >= log2 M` phase bits over Nakagami-m fading.
//!
//! By circular symmetry the average reduces to a rotated symbol at angle
//! `θ ∈ [π/M - π/2^n, π/M + π/2^n]` (uniform) that must stay inside the
//! wedge `E = {0 <= Arg z < 2π/M}`. Conditioning on the real part of the
//! noise gives four terms; averaging each over the fading magnitude (Craig's
//! form of `Q` for the first three) yields `p1..p4`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI, SQRT_2, TAU};

use crate::analytic::{QuadratureSettings, SepQuery};
use crate::error::{Error, Result};
use crate::quadrature::{graded_breaks, graded_from_zero, integrate, integrate_breaks, AdaptiveOptions};
use crate::special::{ln_gamma, q_function};

/// The four components of the average SEP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepComponents {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    /// Combined quadrature error estimate of `p1 + p2 - p3 + p4`.
    pub abs_error: f64,
}

impl SepComponents {
    pub fn total(&self) -> f64 {
        (self.p1 + self.p2 - self.p3 + self.p4).clamp(0.0, 1.0)
    }
}

/// Uniform window of the rotated symbol phase.
fn theta_window(order: usize, bits: u32) -> (f64, f64) {
    let center = PI / order as f64;
    let half = PI / (1u64 << bits) as f64;
    (center - half, center + half)
}

/// Geometric refinement depth for boundary layers of width ~ `1/sqrt(snr)`.
fn edge_levels(snr: f64, width: f64) -> usize {
    if snr <= 1.0 {
        return 2;
    }
    ((10.0 * width * snr.sqrt()).log(4.0).ceil() as i64).clamp(2, 24) as usize
}

fn require_resolvable(q: &SepQuery) -> Result<()> {
    if q.resolvable() {
        Ok(())
    } else {
        Err(Error::config(format!(
            "the quadrature SEP expression needs n >= log2 M (got M = {}, n = {}); \
             simulate the error-floor regime instead",
            q.order(),
            q.bits()
        )))
    }
}

/// Prefactor `2^(n-1) m^m / π^k` in log form.
fn ln_craig_prefactor(q: &SepQuery, pi_power: i32) -> f64 {
    (q.bits() as f64 - 1.0) * LN_2 + q.shape() * q.shape().ln() - pi_power as f64 * PI.ln()
}

/// `∫_0^{π/2} ∫_window (snr g(θ)/sin²β + m)^{-m} dθ dβ` with `g = cos²` or `sin²`.
fn craig_2d(q: &SepQuery, s: &QuadratureSettings, use_cos: bool) -> Result<(f64, f64)> {
    let (lo, hi) = theta_window(q.order(), q.bits());
    let breaks = graded_breaks(lo, hi, edge_levels(q.snr(), hi - lo));
    let (snr, m) = (q.snr(), q.shape());
    let inner_opts = s.level(2, 1);
    let outer = integrate(
        |beta: f64| {
            let sb = beta.sin().powi(2);
            let r = integrate_breaks(
                |theta: f64| {
                    let g = if use_cos { theta.cos() } else { theta.sin() };
                    Ok((-m * (snr * g * g / sb + m).ln()).exp())
                },
                &breaks,
                &inner_opts,
            )?;
            Ok(r.value)
        },
        0.0,
        FRAC_PI_2,
        &s.level(2, 0),
    )?;
    Ok((outer.value, outer.abs_error + inner_opts.rel_tol * outer.value.abs()))
}

fn p1_p2(q: &SepQuery, s: &QuadratureSettings, use_cos: bool) -> Result<(f64, f64)> {
    let pref = ln_craig_prefactor(q, 2).exp();
    let (v, e) = craig_2d(q, s, use_cos)?;
    Ok((pref * v, pref * e))
}

fn p3(q: &SepQuery, s: &QuadratureSettings) -> Result<(f64, f64)> {
    let (lo, hi) = theta_window(q.order(), q.bits());
    let breaks = graded_breaks(lo, hi, edge_levels(q.snr(), hi - lo));
    let (snr, m) = (q.snr(), q.shape());
    let (o0, o1, o2) = (s.level(3, 0), s.level(3, 1), s.level(3, 2));
    let outer = integrate(
        |gamma: f64| {
            let sg = gamma.sin().powi(2);
            let mid = integrate(
                |beta: f64| {
                    let sb = beta.sin().powi(2);
                    let r = integrate_breaks(
                        |theta: f64| {
                            let (st, ct) = theta.sin_cos();
                            Ok((-m * (snr * ct * ct / sb + snr * st * st / sg + m).ln()).exp())
                        },
                        &breaks,
                        &o2,
                    )?;
                    Ok(r.value)
                },
                0.0,
                FRAC_PI_2,
                &o1,
            )?;
            Ok(mid.value)
        },
        0.0,
        FRAC_PI_2,
        &o0,
    )?;
    let pref = ln_craig_prefactor(q, 3).exp();
    let err = outer.abs_error + o1.rel_tol * outer.value.abs();
    Ok((pref * outer.value, pref * err))
}

/// `∫ Q(√(2 snr) r sec φ sin(φ - θ) + √2 w tan φ) e^{-w²} dw` over
/// `w >= -sqrt(snr) r cos θ`, with `φ = 2π/M`.
fn wedge_overflow(
    snr: f64,
    r: f64,
    theta: f64,
    order: usize,
    trunc: f64,
    opts: &AdaptiveOptions,
) -> Result<f64> {
    if order <= 4 {
        return Ok(0.0);
    }
    let phi = TAU / order as f64;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let tan_phi = sin_phi / cos_phi;
    let a = snr.sqrt() * r;
    let shift = SQRT_2 * a * (phi - theta).sin() / cos_phi;
    let start = -a * theta.cos();
    let lo = start.max(-trunc);
    let hi = start.max(0.0) + trunc;
    if lo >= hi {
        return Ok(0.0);
    }
    let mut breaks = vec![lo, hi];
    let w0 = -a * (phi - theta).sin() / sin_phi;
    if w0 > lo && w0 < hi {
        breaks.insert(1, w0);
    }
    let r = integrate_breaks(
        |w: f64| Ok(q_function(shift + SQRT_2 * w * tan_phi) * (-w * w).exp()),
        &breaks,
        opts,
    )?;
    Ok(r.value)
}

fn p4_impl(q: &SepQuery, s: &QuadratureSettings, magnitude_factor: bool) -> Result<(f64, f64)> {
    if q.order() <= 4 {
        return Ok((0.0, 0.0));
    }
    let (lo, hi) = theta_window(q.order(), q.bits());
    let (snr, m) = (q.snr(), q.shape());
    let theta_breaks = graded_breaks(lo, hi, edge_levels(snr, hi - lo));
    let r_max = (40.0 / m).sqrt().max(4.0);
    let r_levels = ((r_max * snr.max(1.0).sqrt()).log2().ceil() as i64 + 6).clamp(4, 40) as usize;
    let r_breaks = graded_from_zero(r_max, r_levels);
    let trunc = s.trunc_sigma / SQRT_2;
    let (o0, o1, o2) = (s.level(3, 0), s.level(3, 1), s.level(3, 2));
    let outer = integrate_breaks(
        |theta: f64| {
            let mid = integrate_breaks(
                |r: f64| {
                    if r <= 0.0 {
                        return Ok(0.0);
                    }
                    let weight = if magnitude_factor {
                        ((2.0 * m - 1.0) * r.ln() - m * r * r).exp()
                    } else {
                        (-m * r * r).exp()
                    };
                    if weight == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(weight * wedge_overflow(snr, r, theta, q.order(), trunc, &o2)?)
                },
                &r_breaks,
                &o1,
            )?;
            Ok(mid.value)
        },
        &theta_breaks,
        &o0,
    )?;
    let ln_pref = q.bits() as f64 * LN_2 + m * m.ln() - 1.5 * PI.ln() - ln_gamma(m);
    let pref = ln_pref.exp();
    let err = outer.abs_error + o1.rel_tol * outer.value.abs();
    Ok((pref * outer.value, pref * err))
}

/// `p4` computed with weight `exp(-(w² + m r²))` alone, i.e. without the
/// `r^(2m-1)` factor of the Nakagami density. Coincides with the `p4`
/// component only for `m = 1/2`; kept so the discrepancy stays testable.
pub fn p4_without_magnitude_factor(q: &SepQuery, s: &QuadratureSettings) -> Result<f64> {
    require_resolvable(q)?;
    s.validate()?;
    Ok(p4_impl(q, s, false)?.0)
}

/// The individual integrals `p1, p2, p3, p4`.
///
/// For BPSK only `p2` contributes; the other fields are zero. For QPSK `p4`
/// vanishes because the wedge edge is the imaginary axis.
pub fn sep_p_components(q: &SepQuery, s: &QuadratureSettings) -> Result<SepComponents> {
    require_resolvable(q)?;
    s.validate()?;
    let (p2, e2) = p1_p2(q, s, false)?;
    if q.order() == 2 {
        return Ok(SepComponents {
            p1: 0.0,
            p2,
            p3: 0.0,
            p4: 0.0,
            abs_error: e2,
        });
    }
    let (p1, e1) = p1_p2(q, s, true)?;
    let (p3, e3) = p3(q, s)?;
    let (p4, e4) = p4_impl(q, s, true)?;
    Ok(SepComponents {
        p1,
        p2,
        p3,
        p4,
        abs_error: e1 + e2 + e3 + e4,
    })
}

/// Average SEP for `n >= log2 M`.
pub fn sep_theorem3(q: &SepQuery, s: &QuadratureSettings) -> Result<f64> {
    let c = sep_p_components(q, s)?;
    Ok(if q.order() == 2 {
        c.p2.clamp(0.0, 1.0)
    } else {
        c.total()
    })
}

/// Lower and upper bounds `(p1 + p2/2, p1 + 2 p2)`, valid for `M >= 4`.
pub fn sep_bounds(q: &SepQuery, s: &QuadratureSettings) -> Result<(f64, f64)> {
    if q.order() < 4 {
        return Err(Error::config("the p1/p2 bounds need M >= 4"));
    }
    require_resolvable(q)?;
    s.validate()?;
    let (p1, _) = p1_p2(q, s, true)?;
    let (p2, _) = p1_p2(q, s, false)?;
    Ok((p1 + 0.5 * p2, p1 + 2.0 * p2))
}

/// Terms of the error probability for a fixed channel magnitude `r` and
/// rotated phase `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalTerms {
    /// `Q(√(2 snr) r cos θ)`: the point is dragged left of the imaginary axis.
    pub q_cos: f64,
    /// `Q(√(2 snr) r sin θ)`: dragged below the real axis.
    pub q_sin: f64,
    pub product: f64,
    /// Escape across the upper wedge edge `Arg z = 2π/M` (zero for `M <= 4`).
    pub overflow: f64,
}

impl ConditionalTerms {
    pub fn total(&self) -> f64 {
        self.q_cos + self.q_sin - self.product + self.overflow
    }
}

/// Conditional error probability terms, `0 < θ < 2π/M`.
pub fn conditional_sep_terms(
    snr: f64,
    r: f64,
    theta: f64,
    order: usize,
    s: &QuadratureSettings,
) -> Result<ConditionalTerms> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::config(format!("M = {order} must be a power of two")));
    }
    if !(snr >= 0.0 && snr.is_finite()) || !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("snr = {snr} and r = {r} must be finite and >= 0")));
    }
    let phi = TAU / order as f64;
    if !(theta > 0.0 && theta < phi) {
        return Err(Error::Domain(format!("theta = {theta} outside (0, 2π/M)")));
    }
    s.validate()?;
    let a = (2.0 * snr).sqrt() * r;
    let q_sin = q_function(a * theta.sin());
    if order == 2 {
        // The decision region is the upper half plane.
        return Ok(ConditionalTerms {
            q_cos: 0.0,
            q_sin,
            product: 0.0,
            overflow: 0.0,
        });
    }
    let q_cos = q_function(a * theta.cos());
    let opts = AdaptiveOptions {
        rel_tol: s.rel_tol,
        abs_tol: s.abs_tol,
        max_intervals: s.max_depth,
    };
    let overflow = wedge_overflow(snr, r, theta, order, s.trunc_sigma / SQRT_2, &opts)? / PI.sqrt();
    Ok(ConditionalTerms {
        q_cos,
        q_sin,
        product: q_cos * q_sin,
        overflow,
    })
}

/// `P(sqrt(snr) r e^{jθ} + W ∉ E)` for `W ~ CN(0, 1)`.
pub fn conditional_sep(snr: f64, r: f64, theta: f64, order: usize, s: &QuadratureSettings) -> Result<f64> {
    Ok(conditional_sep_terms(snr, r, theta, order, s)?.total())
}
