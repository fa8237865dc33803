//! Globally adaptive Gauss–Kronrod (7/15) integration on finite intervals.
//!
//! Panels are kept in a max-heap keyed by their error estimate; the worst
//! panel is bisected until the summed error meets
//! `max(abs_tol, rel_tol * |I|)`. Integrands are fallible so nested
//! integrals can propagate their own convergence failures.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Quadrature {
            value,
            error,
            intervals: 1,
        });
    }
    Ok(Panel { a, b, value, error })
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, seeding the adaptive
/// refinement with the panels delimited by `breaks` (sorted ascending).
pub fn integrate_breaks<F>(mut f: F, breaks: &[f64], opts: &AdaptiveOptions) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    assert!(breaks.len() >= 2, "need at least one panel");
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod15(&mut f, w[0], w[1])?);
            evaluations += 15;
        }
    }
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target || heap.is_empty() {
            return Ok(Integral {
                value,
                abs_error: error,
                evaluations,
            });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                value,
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel can no longer be split in floating point.
            return Err(Error::Quadrature {
                value,
                error,
                intervals: heap.len() + 1,
            });
        }
        heap.push(kronrod15(&mut f, worst.a, mid)?);
        heap.push(kronrod15(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &AdaptiveOptions) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    if a > b {
        let r = integrate_breaks(f, &[b, a], opts)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }
    integrate_breaks(f, &[a, b], opts)
}

/// Breakpoints on `[a, b]` refined geometrically toward both ends, for
/// integrands with boundary layers at either edge.
pub fn graded_breaks(a: f64, b: f64, levels: usize) -> Vec<f64> {
    let w = b - a;
    let mut pts = Vec::with_capacity(2 * levels + 3);
    pts.push(a);
    for j in (1..=levels).rev() {
        pts.push(a + 0.5 * w * 0.25f64.powi(j as i32));
    }
    pts.push(a + 0.5 * w);
    for j in 1..=levels {
        pts.push(b - 0.5 * w * 0.25f64.powi(j as i32));
    }
    pts.push(b);
    pts
}

/// Breakpoints on `[0, b]` refined geometrically toward zero, down to `b * 2^-levels`.
pub fn graded_from_zero(b: f64, levels: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=levels).rev().map(|j| b * 0.5f64.powi(j as i32)).collect();
    pts.insert(0, 0.0);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64> {
        move |x| Ok(f(x))
    }

    #[test]
    fn polynomials_exact() {
        let r = integrate(ok(|x| x * x * x - 2.0 * x), 0.0, 3.0, &AdaptiveOptions::default()).unwrap();
        assert!((r.value - (81.0 / 4.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn smooth_transcendental() {
        let r = integrate(ok(f64::sin), 0.0, std::f64::consts::PI, &AdaptiveOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        let r = integrate(ok(|x| (-x * x).exp()), -10.0, 10.0, &AdaptiveOptions::default()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(ok(|x: f64| 1.0 / x.sqrt()), 0.0, 1.0, &AdaptiveOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_and_empty() {
        let o = AdaptiveOptions::default();
        let r = integrate(ok(|x| x), 1.0, 0.0, &o).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
        assert_eq!(integrate(ok(|x| x), 2.0, 2.0, &o).unwrap().value, 0.0);
    }

    #[test]
    fn narrow_feature_found_with_grading() {
        let f = ok(|x: f64| 1.0 / (1.0 + (x / 1e-6).powi(2)));
        let exact = 1e-6 * (1.0f64 / 1e-6).atan();
        let r = integrate_breaks(f, &graded_from_zero(1.0, 40), &AdaptiveOptions::default()).unwrap();
        assert!((r.value / exact - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reports_failure() {
        let o = AdaptiveOptions {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_intervals: 3,
        };
        let r = integrate(ok(|x: f64| (50.0 * x).sin().abs()), 0.0, 10.0, &o);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate(|_| Err(Error::Domain("x".into())), 0.0, 1.0, &AdaptiveOptions::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn graded_breaks_are_sorted() {
        let b = graded_breaks(1.0, 2.0, 6);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert_eq!((b[0], *b.last().unwrap()), (1.0, 2.0));
        let z = graded_from_zero(3.0, 10);
        assert!(z.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(z[0], 0.0);
    }
}
