//! Nakagami-m fading, complex AWGN and reproducible random substreams.
//!
//! Every random draw in the crate comes from an [`RngStream`]: a ChaCha8
//! generator (`rand_chacha` 0.9) keyed by expanding the 64-bit seed with
//! `SeedableRng::seed_from_u64`, with the substream selected through the
//! ChaCha stream counter. The pair `(seed, stream_id)` therefore pins the
//! whole sequence, and distinct stream ids never overlap.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Circularly symmetric fading with Nakagami-m magnitude and unit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    m: f64,
    power: Gamma<f64>,
}

impl FadingSpec {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m >= 0.5) {
            return Err(Error::config(format!(
                "Nakagami shape m = {m} must be finite and at least 0.5"
            )));
        }
        let power = Gamma::new(m, 1.0 / m)
            .map_err(|e| Error::config(format!("gamma(m = {m}): {e}")))?;
        Ok(Self { m, power })
    }

    /// Rayleigh fading (`m = 1`).
    pub fn rayleigh() -> Self {
        Self::new(1.0).expect("m = 1 is valid")
    }

    pub fn shape(&self) -> f64 {
        self.m
    }

    /// Spread parameter; fixed at one so that `E|h|^2 = 1`.
    pub fn omega(&self) -> f64 {
        1.0
    }

    /// Draws `h = sqrt(G) e^{jφ}` with `G ~ Gamma(m, 1/m)` and `φ ~ U[-π, π)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let g: f64 = self.power.sample(rng);
        let phi = rng.random_range(-PI..PI);
        Complex64::from_polar(g.sqrt(), phi)
    }
}

pub fn sample_fading<R: Rng + ?Sized>(spec: &FadingSpec, rng: &mut R) -> Complex64 {
    spec.sample(rng)
}

/// Draws `w ~ CN(0, 1)`: independent real and imaginary parts of variance 1/2.
pub fn sample_noise<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Nakagami-m magnitude density with unit spread,
/// `f(r) = 2 m^m / Γ(m) r^(2m-1) exp(-m r^2)`.
pub fn nakagami_magnitude_pdf(r: f64, m: f64) -> Result<f64> {
    if !(m.is_finite() && m >= 0.5) {
        return Err(Error::config(format!("Nakagami shape m = {m} below 0.5")));
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(format!("magnitude r = {r} is negative")));
    }
    if r == f64::INFINITY {
        return Ok(0.0);
    }
    let log_norm = std::f64::consts::LN_2 + m * m.ln() - ln_gamma(m);
    if r == 0.0 {
        return Ok(if m == 0.5 { log_norm.exp() } else { 0.0 });
    }
    Ok((log_norm + (2.0 * m - 1.0) * r.ln() - m * r * r).exp())
}

/// A seeded ChaCha8 substream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        StreamFactory::new(seed).stream(stream_id)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Caches the expanded key of a seed so substreams are cheap to open.
#[derive(Debug, Clone)]
pub struct StreamFactory {
    seed: u64,
    key: <ChaCha8Rng as SeedableRng>::Seed,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            key: ChaCha8Rng::seed_from_u64(seed).get_seed(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, stream_id: u64) -> RngStream {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream_id);
        RngStream {
            seed: self.seed,
            stream_id,
            rng,
        }
    }
}
