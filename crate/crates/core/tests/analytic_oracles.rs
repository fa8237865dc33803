//! Quadrature results checked against independently computed references.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use phasequant::analytic::*;
use phasequant::channel::{sample_noise, RngStream};
use phasequant::curve::Resolution;
use phasequant::detector::cone_probability;
use phasequant::geometry::ConeRegion;
use phasequant::special::{ln_gamma, q_function};
use phasequant::{db_to_linear, Error};

fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

/// Five-point Gauss-Legendre on `panels` equal pieces of `[a, b]`.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let c = a + (p as f64 + 0.5) * h;
            X.iter().zip(W).map(|(x, w)| w * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

#[test]
fn overflow_component_matches_geometric_average() {
    // The wedge-overflow term equals P(leave the wedge) minus the two
    // axis-crossing terms. Averaging it over the Nakagami magnitude and the
    // uniform θ window must reproduce p4.
    let (order, bits, m, snr) = (8usize, 3u32, 1.0, db_to_linear(6.0));
    let q = SepQuery::new(order, bits, m, snr).unwrap();
    let p4 = sep_p_components(&q, &settings()).unwrap().p4;

    let wedge = ConeRegion::new(0.0, TAU / order as f64).unwrap();
    let half = PI / (1 << bits) as f64;
    let (lo, hi) = (PI / order as f64 - half, PI / order as f64 + half);
    let ln_norm = std::f64::consts::LN_2 + m * m.ln() - ln_gamma(m);
    let overflow = |r: f64, theta: f64| {
        let mu = Complex64::from_polar(snr.sqrt() * r, theta);
        let inside = cone_probability(mu, &wedge, 1e-13).unwrap().0;
        let a = (2.0 * snr).sqrt() * r;
        let (qc, qs) = (q_function(a * theta.cos()), q_function(a * theta.sin()));
        1.0 - inside - (qc + qs - qc * qs)
    };
    let averaged = gauss_legendre(
        |theta| {
            gauss_legendre(
                |r| (ln_norm + (2.0 * m - 1.0) * r.ln() - m * r * r).exp() * overflow(r, theta),
                0.0,
                6.0,
                60,
            )
        },
        lo,
        hi,
        12,
    ) / (hi - lo);
    assert!((p4 - averaged).abs() < 1e-6, "p4 {p4} vs {averaged}");
}

#[test]
fn printed_overflow_weight_differs_unless_m_is_half() {
    let s = settings();
    let half = SepQuery::from_db(8, 3, 0.5, 8.0).unwrap();
    let c = sep_p_components(&half, &s).unwrap();
    assert!((c.p4 - p4_without_magnitude_factor(&half, &s).unwrap()).abs() < 1e-9);
    let two = SepQuery::from_db(8, 3, 2.0, 8.0).unwrap();
    let c = sep_p_components(&two, &s).unwrap();
    let printed = p4_without_magnitude_factor(&two, &s).unwrap();
    assert!((printed / c.p4 - 1.0).abs() > 0.5, "{printed} vs {}", c.p4);
}

#[test]
fn conditional_sep_matches_noise_simulation() {
    let (snr, r, theta, order) = (1.0, 1.0, PI / 8.0, 8usize);
    let p = conditional_sep(snr, r, theta, order, &settings()).unwrap();
    let wedge = ConeRegion::new(0.0, TAU / order as f64).unwrap();
    let x = Complex64::from_polar(snr.sqrt() * r, theta);
    let mut rng = RngStream::new(2024, 0);
    let n = 1_000_000;
    let misses = (0..n)
        .filter(|_| !wedge.contains_point(x + sample_noise(&mut rng)).unwrap())
        .count();
    let p_hat = misses as f64 / n as f64;
    let se = (p_hat * (1.0 - p_hat) / n as f64).sqrt();
    assert!((p_hat - p).abs() <= 3.0 * se, "{p_hat} ± {se} vs {p}");
}

#[test]
fn conditional_sep_matches_cone_mass() {
    for (order, snr, r, theta) in [(8usize, 3.0f64, 0.8, 0.5), (16, 20.0, 1.1, 0.2), (4, 5.0, 0.7, 1.2), (2, 2.0, 1.0, 2.0)] {
        let wedge = ConeRegion::new(0.0, TAU / order as f64).unwrap();
        let mu = Complex64::from_polar(snr.sqrt() * r, theta);
        let want = 1.0 - cone_probability(mu, &wedge, 1e-13).unwrap().0;
        let got = conditional_sep(snr, r, theta, order, &settings()).unwrap();
        assert!((got - want).abs() < 1e-9, "M={order}: {got} vs {want}");
    }
}

#[test]
fn closed_form_consistency_chain() {
    let s = settings();
    for snr in [0.05, 1.0, 7.0, 100.0, 1e4] {
        let closed = sep_qpsk_rayleigh_2bit_closed(snr);
        let specialised = sep_qpsk_rayleigh(snr, 2, &s).unwrap();
        let general = sep_theorem3(&SepQuery::new(4, 2, 1.0, snr).unwrap(), &s).unwrap();
        assert!((closed - specialised).abs() < 1e-8);
        assert!((closed - general).abs() < 1e-6);
    }
}

#[test]
fn rayleigh_specialisation_matches_general_form() {
    let s = settings();
    for n in [2u32, 3, 4] {
        for db in [0.0, 10.0, 25.0] {
            let snr = db_to_linear(db);
            let a = sep_qpsk_rayleigh(snr, n, &s).unwrap();
            let b = sep_theorem3(&SepQuery::new(4, n, 1.0, snr).unwrap(), &s).unwrap();
            assert!((a - b).abs() < 1e-6, "n={n} {db} dB: {a} vs {b}");
        }
    }
}

#[test]
fn extra_bits_have_diminishing_returns() {
    let s = settings();
    let p = |n| sep_qpsk_rayleigh(100.0, n, &s).unwrap();
    assert!(p(5) - p(6) < p(2) - p(3));
    assert!(p(2) > p(3) && p(3) > p(4));
}

#[test]
fn asymptote_tracks_exact_value_at_high_snr() {
    let s = settings();
    let ratio = |db: f64, n: u32| {
        let snr = db_to_linear(db);
        asymptotic_sep_qpsk(snr, Resolution::Bits(n)).unwrap() / sep_qpsk_rayleigh(snr, n, &s).unwrap()
    };
    assert!((ratio(50.0, 2) - 1.0).abs() < 0.05, "n=2: {}", ratio(50.0, 2));
    for n in [3u32, 4] {
        // The 1/snr decay is exact, but the printed coefficient keeps a
        // constant excess over the true limit (which loses the joint
        // axis-crossing term).
        let (r50, r60) = (ratio(50.0, n), ratio(60.0, n));
        assert!((r50 - r60).abs() < 1e-3, "n={n}: {r50} vs {r60}");
        assert!((1.25..1.30).contains(&r60), "n={n}: {r60}");
    }
}

#[test]
fn bpsk_one_bit_is_half_the_qpsk_axis_terms() {
    // With one bit the BPSK integral splits into the two QPSK two-bit Craig
    // integrals, each carrying half of the QPSK prefactor.
    let s = settings();
    for m in [0.5, 1.0, 2.5] {
        for snr in [0.3, 4.0, 200.0] {
            let bpsk = sep_theorem3(&SepQuery::new(2, 1, m, snr).unwrap(), &s).unwrap();
            let c = sep_p_components(&SepQuery::new(4, 2, m, snr).unwrap(), &s).unwrap();
            assert!((bpsk - 0.5 * (c.p1 + c.p2)).abs() < 1e-9, "m={m} snr={snr}");
        }
    }
}

#[test]
fn bpsk_rayleigh_one_bit_reference() {
    // One bit keeps only the half plane of y. Given the channel phase, the
    // error is Q(sqrt(2 snr) r |sin θ|); the Rayleigh average of Q(sqrt(2 g) r)
    // is (1 - sqrt(g/(1+g)))/2, leaving a single θ integral.
    let s = settings();
    for snr in [0.5, 3.0, 40.0] {
        let p = sep_theorem3(&SepQuery::new(2, 1, 1.0, snr).unwrap(), &s).unwrap();
        let want = gauss_legendre(
            |t| {
                let g = snr * t.sin().powi(2);
                0.5 * (1.0 - (g / (1.0 + g)).sqrt())
            },
            0.0,
            PI,
            400,
        ) / PI;
        assert!((p - want).abs() < 1e-8, "{snr}: {p} vs {want}");
    }
}

#[test]
fn pure_noise_limit() {
    let s = settings();
    for (order, bits, m) in [(2usize, 1u32, 0.5), (2, 3, 2.0), (4, 2, 1.0), (4, 4, 3.0), (8, 3, 0.5), (8, 5, 1.0), (16, 4, 2.0)] {
        let p = sep_theorem3(&SepQuery::new(order, bits, m, 0.0).unwrap(), &s).unwrap();
        assert!((p - (1.0 - 1.0 / order as f64)).abs() < 1e-7, "M={order} n={bits}: {p}");
    }
}

#[test]
fn sep_decreases_with_snr() {
    let s = settings();
    for (order, bits, m) in [(4usize, 2u32, 1.0), (4, 3, 2.0), (8, 3, 0.5), (8, 4, 1.0)] {
        let values: Vec<f64> = (0..20)
            .map(|i| sep_theorem3(&SepQuery::from_db(order, bits, m, -5.0 + 2.5 * i as f64).unwrap(), &s).unwrap())
            .collect();
        for w in values.windows(2) {
            assert!(w[1] < w[0], "M={order} n={bits} m={m}: {values:?}");
        }
        assert!(values.iter().all(|p| (0.0..=1.0).contains(p)));
    }
}

#[test]
fn components_are_nonnegative_and_ordered() {
    let s = settings();
    for (order, bits, m, db) in [(4usize, 2u32, 1.0, 10.0), (8, 3, 2.0, 20.0), (8, 5, 0.5, 0.0), (16, 4, 1.0, 30.0)] {
        let c = sep_p_components(&SepQuery::from_db(order, bits, m, db).unwrap(), &s).unwrap();
        assert!(c.p1 >= 0.0 && c.p2 >= 0.0 && c.p3 >= 0.0 && c.p4 >= 0.0);
        assert!(c.p3 <= c.p1.min(c.p2) * (1.0 + 1e-9));
    }
}

#[test]
fn bounds_validation() {
    let s = settings();
    assert!(matches!(sep_bounds(&SepQuery::new(8, 2, 1.0, 1.0).unwrap(), &s), Err(Error::Config(_))));
    let (l, u) = sep_bounds(&SepQuery::new(8, 3, 1.0, 0.0).unwrap(), &s).unwrap();
    assert!(l <= 7.0 / 8.0 && 7.0 / 8.0 <= u);
}

#[test]
fn dvo_fit_on_closed_form() {
    let mut c = phasequant::curve::SepCurve::new(4, Resolution::Bits(2), 1.0, phasequant::curve::Method::QpskClosed);
    for db in [30.0, 35.0, 40.0, 45.0, 50.0] {
        c.push(db, sep_qpsk_rayleigh_2bit_closed(db_to_linear(db)), 0.0);
    }
    let fit = dvo_fit(&c, DEFAULT_DVO_WINDOW_DB).unwrap();
    assert!((fit.slope - 0.5).abs() < 0.02, "{}", fit.slope);
}
