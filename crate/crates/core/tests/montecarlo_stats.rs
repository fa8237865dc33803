use phasequant::analytic::{
    dvo_fit, error_floor, sep_qpsk_rayleigh_2bit_closed, sep_theorem3, QuadratureSettings, SepQuery,
};
use phasequant::channel::RngStream;
use phasequant::montecarlo::{run_trial, simulate_sep, sweep_sep, SimPlan, TrialSetup};
use phasequant::db_to_linear;

#[test]
fn identical_plans_give_identical_estimates() {
    let q = SepQuery::from_db(16, 3, 0.7, 25.0).unwrap();
    let plan = SimPlan::fixed(q, 50_000, 77);
    assert_eq!(simulate_sep(&plan).unwrap(), simulate_sep(&plan).unwrap());
    let other = simulate_sep(&SimPlan { seed: 78, ..plan }).unwrap();
    assert_ne!(other.errors, simulate_sep(&plan).unwrap().errors);
}

#[test]
fn halving_the_chunk_size_changes_nothing() {
    let q = SepQuery::from_db(8, 2, 1.0, 15.0).unwrap();
    let base = SimPlan {
        target_rel_ci: 0.01,
        max_trials: 400_000,
        ..SimPlan::new(q, 3)
    };
    let mut last = None;
    for chunk in [4096u64, 2048, 1024, 1] {
        let e = simulate_sep(&base.with_chunk_size(chunk)).unwrap();
        if let Some((errors, trials)) = last {
            assert_eq!((e.errors, e.trials), (errors, trials), "chunk {chunk}");
        }
        last = Some((e.errors, e.trials));
    }
}

#[test]
fn single_trials_replay_from_their_stream() {
    let q = SepQuery::from_db(4, 3, 2.0, 0.0).unwrap();
    let setup = TrialSetup::new(&q).unwrap();
    let plan = SimPlan::fixed(q, 2_000, 19);
    let total = simulate_sep(&plan).unwrap().errors;
    let replayed: u64 = (0..2_000)
        .map(|t| run_trial(&setup, &mut RngStream::new(19, t)).unwrap() as u64)
        .sum();
    assert_eq!(total, replayed);
}

#[test]
fn pure_noise_error_rate() {
    for order in [2usize, 4, 8] {
        let q = SepQuery::new(order, 3, 1.0, 0.0).unwrap();
        let e = simulate_sep(&SimPlan::fixed(q, 200_000, order as u64)).unwrap();
        let want = 1.0 - 1.0 / order as f64;
        assert!((e.p_hat - want).abs() <= 3.0 * e.stderr, "M={order}: {} ± {}", e.p_hat, e.stderr);
    }
}

#[test]
fn confidence_intervals_cover_the_closed_form() {
    let truth = sep_qpsk_rayleigh_2bit_closed(db_to_linear(10.0));
    let q = SepQuery::from_db(4, 2, 1.0, 10.0).unwrap();
    let covered = (0..100u64)
        .filter(|&seed| {
            let e = simulate_sep(&SimPlan::fixed(q, 20_000, 1000 + seed)).unwrap();
            (e.p_hat - truth).abs() <= 1.96 * e.stderr
        })
        .count();
    assert!(covered >= 90, "coverage {covered}/100");
}

#[test]
fn floor_regime_respects_the_lower_bound() {
    for (order, bits) in [(8usize, 1u32), (8, 2), (16, 2), (16, 3), (32, 4)] {
        let q = SepQuery::from_db(order, bits, 1.0, 40.0).unwrap();
        let e = simulate_sep(&SimPlan::fixed(q, 100_000, 5)).unwrap();
        let floor = error_floor(order, bits, 1.0 / order as f64).unwrap();
        assert!(e.p_hat >= floor - 3.0 * e.stderr, "M={order} n={bits}: {} < {floor}", e.p_hat);
        // Only 2^n symbols can ever be decided, so at high SNR about
        // 1 - 2^n/M of the symbols are lost.
        let lost = 1.0 - (1u64 << bits) as f64 / order as f64;
        assert!((e.p_hat - lost).abs() < 0.02, "M={order} n={bits}: {}", e.p_hat);
    }
}

#[test]
fn agrees_with_quadrature_in_regime() {
    let s = QuadratureSettings::default();
    for (order, bits, m, db) in [(4usize, 3u32, 2.0, 10.0), (8, 3, 1.0, 15.0), (8, 4, 0.5, 5.0), (16, 5, 1.5, 20.0), (2, 2, 1.0, 5.0)] {
        let q = SepQuery::from_db(order, bits, m, db).unwrap();
        let p = sep_theorem3(&q, &s).unwrap();
        let e = simulate_sep(&SimPlan::fixed(q, 300_000, 11)).unwrap();
        assert!((e.p_hat - p).abs() <= 3.0 * e.stderr + 1e-6, "M={order} n={bits} m={m}: {} vs {p}", e.p_hat);
    }
}

#[test]
fn sweep_is_monotone_and_shows_the_third_bit_gain() {
    let grid: Vec<f64> = (0..=8).map(|i| 5.0 * i as f64).collect();
    let plan = |bits| SimPlan {
        max_trials: 200_000,
        target_rel_ci: 0.03,
        ..SimPlan::new(SepQuery::new(4, bits, 1.0, 1.0).unwrap(), 9)
    };
    let (two, _) = sweep_sep(&plan(2), &grid).unwrap();
    let (three, _) = sweep_sep(&plan(3), &grid).unwrap();
    for c in [&two, &three] {
        for w in c.points.windows(2) {
            assert!(w[1].value <= w[0].value + 3.0 * (w[0].uncertainty + w[1].uncertainty));
        }
    }
    let at40 = |c: &phasequant::curve::SepCurve| c.points.last().unwrap().value;
    assert!(at40(&three) < 0.1 * at40(&two), "{} vs {}", at40(&three), at40(&two));
}

#[test]
#[ignore = "needs about 10^8 trials per point; run with --ignored"]
fn simulated_diversity_order_with_spare_bits() {
    let plan = SimPlan {
        target_rel_ci: 0.02,
        ..SimPlan::new(SepQuery::new(4, 4, 2.0, 1.0).unwrap(), 1)
    };
    let grid = [15.0, 17.5, 20.0, 22.5, 25.0];
    let (curve, _) = sweep_sep(&plan, &grid).unwrap();
    let fit = dvo_fit(&curve, (15.0, 25.0)).unwrap();
    assert!((fit.slope - 2.0).abs() < 0.15, "slope {}", fit.slope);
}
