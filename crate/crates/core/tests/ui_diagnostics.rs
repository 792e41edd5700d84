use momentgap_core::experiment::draw_iid;
use momentgap_core::sampling::{standard_normal, uniform01, StreamKey};
use momentgap_core::ui_diagnostics::{
    check_ui_sufficient, ic_compare, integrated_survivor, tail_functional, IcVerdict,
};
use proptest::prelude::*;

fn spike(n: usize, m: usize, seed: u64) -> Vec<f64> {
    let cut = 1.0 / n as f64;
    draw_iid(m, StreamKey::new(seed, (n as u64) << 32, 0), |s| {
        if uniform01(s) < cut {
            n as f64
        } else {
            0.0
        }
    })
}

fn exponential(rate: f64, m: usize, seed: u64, lane: u32) -> Vec<f64> {
    draw_iid(m, StreamKey::new(seed, 0, lane), |s| {
        -(1.0 - uniform01(s)).ln() / rate
    })
}

#[test]
fn uniform_sample_has_no_tail_above_one() {
    let u = draw_iid(10_000, StreamKey::new(1, 0, 0), uniform01);
    let c = tail_functional(&[u], 1.0, &[1.0]).unwrap();
    assert_eq!(c.values[0][0].value, 0.0);
}

#[test]
fn spike_family_tail_stays_near_one() {
    let m = 200_000;
    let samples = vec![spike(10, m, 3), spike(100, m, 3)];
    let c = tail_functional(&samples, 1.0, &[5.0]).unwrap();
    for row in &c.values {
        // analytic value n · (1/n) = 1; sd of n·1(U<1/n) is sqrt(n - 1)
        assert!((row[0].value - 1.0).abs() <= row[0].half_width, "{row:?}");
    }
}

#[test]
fn ui_sufficient_examples() {
    let m = 200_000;
    let normal: Vec<Vec<f64>> = (0..3)
        .map(|k| draw_iid(m, StreamKey::new(8, k, 0), standard_normal))
        .collect();
    let rep = check_ui_sufficient(&normal, 1.0, 2.0).unwrap();
    assert!(rep.pass);
    for e in &rep.estimates {
        assert!((e.value - 1.0).abs() <= e.half_width);
    }

    let spikes = vec![spike(10, m, 9), spike(100, m, 9)];
    let rep = check_ui_sufficient(&spikes, 1.0, 50.0).unwrap();
    for (e, n) in rep.estimates.iter().zip([10.0, 100.0]) {
        // E X_n^2 = n^2 / n = n
        assert!((e.value - n).abs() <= e.half_width, "{e:?} vs {n}");
    }
    assert!(!rep.pass);
    assert!(check_ui_sufficient(&spikes, 0.0, 1.0).is_err());
}

#[test]
fn exponential_integrated_survivor_matches_closed_form() {
    let xs = exponential(1.0, 1_000_000, 4, 0);
    let t = [0.0, 0.5, 1.0, 2.0, 4.0];
    let h = integrated_survivor(&xs, &t).unwrap();
    for ((t, h), hw) in t.iter().zip(&h.h_values).zip(&h.half_widths) {
        let want = (-t).exp();
        assert!(
            (h - want).abs() <= hw.max(1e-4),
            "H({t}) = {h}, want {want}"
        );
    }
    assert!((h.h_values[2] - (-1f64).exp()).abs() < 0.005);
}

#[test]
fn exponential_rates_are_ic_ordered() {
    let a = exponential(1.0, 1_000_000, 6, 0);
    let b = exponential(0.5, 1_000_000, 6, 5);
    let grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.5).collect();
    assert_eq!(ic_compare(&a, &b, &grid).unwrap().verdict, IcVerdict::LeqIc);
    assert_eq!(ic_compare(&b, &a, &grid).unwrap().verdict, IcVerdict::GeqIc);
}

/// `H(t)` of U(lo, hi) in closed form.
fn uniform_h(lo: f64, hi: f64, t: f64) -> f64 {
    if t <= lo {
        (lo + hi) / 2.0 - t
    } else if t < hi {
        (hi - t).powi(2) / (2.0 * (hi - lo))
    } else {
        0.0
    }
}

#[test]
fn wide_uniform_dominates_narrow_uniform() {
    // U(1,2) sits below U(0,3) in convex order: equal means, H_{(0,3)} >= H_{(1,2)} everywhere
    let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
    for &t in &grid {
        assert!(uniform_h(0.0, 3.0, t) >= uniform_h(1.0, 2.0, t));
    }
    assert!(uniform_h(0.0, 3.0, 1.5) > uniform_h(1.0, 2.0, 1.5) + 0.1);
    let m = 1_000_000;
    let wide = draw_iid(m, StreamKey::new(2, 0, 0), |s| 3.0 * uniform01(s));
    let narrow = draw_iid(m, StreamKey::new(2, 0, 5), |s| 1.0 + uniform01(s));
    let cmp = ic_compare(&wide, &narrow, &grid).unwrap();
    assert_eq!(cmp.verdict, IcVerdict::GeqIc);
}

#[test]
fn ic_rejects_negative_values() {
    assert!(ic_compare(&[1.0, -0.5], &[1.0], &[0.0]).is_err());
}

fn dyadic_sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..4096).prop_map(|k| f64::from(k) / 64.0), 1..200)
}

proptest! {
    #[test]
    fn tail_functional_is_monotone_and_nonnegative(
        xs in prop::collection::vec(-1e3f64..1e3, 1..300),
        r in 0.1f64..4.0,
        mut grid in prop::collection::vec(0.0f64..1e4, 1..30),
    ) {
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let c = tail_functional(&[xs], r, &grid).unwrap();
        let row = &c.values[0];
        prop_assert!(row.iter().all(|p| p.value >= 0.0));
        prop_assert!(row.windows(2).all(|w| w[1].value <= w[0].value));
    }

    #[test]
    fn survivor_curve_is_convex_nonincreasing(
        xs in prop::collection::vec(0.0f64..100.0, 1..300),
        step in 0.01f64..5.0,
    ) {
        let grid: Vec<f64> = (0..60).map(|i| i as f64 * step).collect();
        let h = integrated_survivor(&xs, &grid).unwrap().h_values;
        prop_assert!(h.iter().all(|&v| v >= 0.0));
        prop_assert!(h.windows(2).all(|w| w[1] <= w[0]));
        for w in h.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-12 * w[0].max(1.0), "{:?}", w);
        }
    }

    #[test]
    fn survivor_at_zero_is_the_mean(xs in dyadic_sample()) {
        // dyadic values keep every partial sum exact, so equality is exact
        let h = integrated_survivor(&xs, &[0.0]).unwrap().h_values[0];
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert_eq!(h, mean);
    }

    #[test]
    fn self_comparison_never_crosses(xs in prop::collection::vec(0.0f64..50.0, 2..200)) {
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 2.5).collect();
        let cmp = ic_compare(&xs, &xs, &grid).unwrap();
        prop_assert_eq!(cmp.verdict, IcVerdict::LeqIc);
        prop_assert!(cmp.margins.iter().all(|m| m.margin() == 0.0));
    }
}
