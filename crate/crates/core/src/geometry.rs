//! Constellation and phase-quantizer geometry.
//!
//! All phases live in `[-π, π)`. A value that lands on `+π` (for example
//! `atan2(0.0, -1.0)`) is folded back to `-π`, and every half-open cone
//! assigns its lower edge to itself and its upper edge to the next cone.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported quantizer resolution and modulation exponent.
pub const MAX_BITS: u32 = 30;

/// Folds an arbitrary angle into `[-π, π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = (x + PI).rem_euclid(TAU);
    if y >= TAU {
        y = 0.0;
    }
    let y = y - PI;
    if y >= PI {
        -PI
    } else {
        y
    }
}

/// Principal argument of `z` in `[-π, π)`.
pub fn phase(z: Complex64) -> Result<f64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::DegenerateInput("phase of zero is undefined"));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("non-finite complex sample {z}")));
    }
    let a = z.im.atan2(z.re);
    Ok(if a >= PI { -PI } else { a })
}

/// An M-PSK constellation with `x_i = exp(jπ((2i+1)/M - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationSpec {
    order: usize,
    angles: Vec<f64>,
}

impl ModulationSpec {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() || order > (1usize << MAX_BITS) {
            return Err(Error::config(format!(
                "modulation order M = {order} must be a power of two in [2, 2^{MAX_BITS}]"
            )));
        }
        let m = order as f64;
        let angles = (0..order)
            .map(|i| PI * (2 * i + 1) as f64 / m - PI)
            .collect();
        Ok(Self { order, angles })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `log2 M`.
    pub fn bits(&self) -> u32 {
        self.order.trailing_zeros()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angle(&self, i: usize) -> Result<f64> {
        self.angles.get(i).copied().ok_or(Error::Index {
            what: "symbol",
            index: i,
            len: self.order,
        })
    }

    pub fn symbol(&self, i: usize) -> Result<Complex64> {
        Ok(Complex64::from_polar(1.0, self.angle(i)?))
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.angles.iter().map(|&a| Complex64::from_polar(1.0, a))
    }

    /// Angular spacing `2π/M` between adjacent symbols.
    pub fn spacing(&self) -> f64 {
        TAU / self.order as f64
    }
}

pub fn build_constellation(order: usize) -> Result<ModulationSpec> {
    ModulationSpec::new(order)
}

/// A half-open angular sector `[lower, lower + width)` measured on the circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeRegion {
    lower: f64,
    width: f64,
}

impl ConeRegion {
    /// `lower` is wrapped into `[-π, π)`; `width` must lie in `(0, 2π]`.
    pub fn new(lower: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width <= TAU) || !lower.is_finite() {
            return Err(Error::Domain(format!(
                "cone with lower edge {lower} and width {width}"
            )));
        }
        Ok(Self {
            lower: wrap_phase(lower),
            width,
        })
    }

    pub fn lower_angle(&self) -> f64 {
        self.lower
    }

    /// Upper edge, `lower + width`; may exceed `π`.
    pub fn upper_angle(&self) -> f64 {
        self.lower + self.width
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Angle of the ray bisecting the cone, in `[-π, π)`.
    pub fn bisector(&self) -> f64 {
        wrap_phase(self.lower + 0.5 * self.width)
    }

    /// Membership of a phase, invariant under shifts by multiples of `2π`.
    pub fn contains(&self, angle: f64) -> bool {
        let mut d = (angle - self.lower).rem_euclid(TAU);
        if d >= TAU {
            d = 0.0;
        }
        d < self.width
    }

    pub fn contains_point(&self, z: Complex64) -> Result<bool> {
        Ok(self.contains(phase(z)?))
    }

    /// The same cone rotated counter-clockwise by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            lower: wrap_phase(self.lower + angle),
            width: self.width,
        }
    }
}

/// Uniform n-bit phase quantizer with `2^n` cones
/// `R_k = {z : 2πk/2^n <= Arg z + π < 2π(k+1)/2^n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantizerSpec {
    bits: u32,
}

impl QuantizerSpec {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::config(format!(
                "quantizer resolution n = {bits} must be in [1, {MAX_BITS}]"
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn region_count(&self) -> usize {
        1usize << self.bits
    }

    /// `2π / 2^n`.
    pub fn sector_width(&self) -> f64 {
        TAU / self.region_count() as f64
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k < self.region_count() {
            Ok(())
        } else {
            Err(Error::Index {
                what: "quantizer region",
                index: k,
                len: self.region_count(),
            })
        }
    }

    /// Index of the cone containing the phase `angle` (already in `[-π, π)`).
    pub fn quantize_phase(&self, angle: f64) -> usize {
        let k = ((angle + PI) / self.sector_width()).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.region_count() - 1)
        }
    }

    /// Index of the cone containing `y`.
    pub fn quantize(&self, y: Complex64) -> Result<usize> {
        Ok(self.quantize_phase(phase(y)?))
    }

    /// Phase of the half-line bisecting `R_k`: `π(2k+1)/2^n - π`.
    pub fn bisector_angle(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(PI * (2 * k + 1) as f64 / self.region_count() as f64 - PI)
    }

    pub fn region(&self, k: usize) -> Result<ConeRegion> {
        self.check_index(k)?;
        ConeRegion::new(
            self.sector_width() * k as f64 - PI,
            self.sector_width(),
        )
    }

    /// Cell of the channel-phase partition `{D_k}` containing `h`.
    ///
    /// `D_k` covers `(2k-1)π/2^n <= Arg h + π < (2k+1)π/2^n`, with `D_0`
    /// wrapping across `±π`, so `D_{2^(n-1)}` is centred on phase zero.
    pub fn fading_partition_index(&self, h: Complex64) -> Result<usize> {
        Ok(self.partition_of_phase(phase(h)?))
    }

    pub fn partition_of_phase(&self, angle: f64) -> usize {
        let count = self.region_count();
        let k = ((angle + PI) / self.sector_width() + 0.5).floor() as i64;
        k.rem_euclid(count as i64) as usize
    }
}

pub fn quantize(y: Complex64, q: &QuantizerSpec) -> Result<usize> {
    q.quantize(y)
}

pub fn bisector_angle(k: usize, q: &QuantizerSpec) -> Result<f64> {
    q.bisector_angle(k)
}

pub fn fading_partition_index(h: Complex64, q: &QuantizerSpec) -> Result<usize> {
    q.fading_partition_index(h)
}

/// Symbol decision cone `E_i = [Arg x_i - π/M, Arg x_i + π/M)`.
pub fn symbol_cone(i: usize, modulation: &ModulationSpec) -> Result<ConeRegion> {
    let m = modulation.order();
    if i >= m {
        return Err(Error::Index {
            what: "symbol",
            index: i,
            len: m,
        });
    }
    ConeRegion::new(TAU * i as f64 / m as f64 - PI, modulation.spacing())
}

/// Region of attraction `E_{i,k}`: the cone `E_i` rotated by
/// `(k - 2^(n-1)) 2π/2^n`. When the channel lies in `D_k`, every received
/// point in `E_{i,k}` is decoded as symbol `i`.
pub fn region_of_attraction(
    i: usize,
    k: usize,
    modulation: &ModulationSpec,
    quantizer: &QuantizerSpec,
) -> Result<ConeRegion> {
    quantizer.check_index(k)?;
    let base = symbol_cone(i, modulation)?;
    let half = quantizer.region_count() as i64 / 2;
    let steps = k as i64 - half;
    Ok(base.rotated(steps as f64 * quantizer.sector_width()))
}
