use momentgap_core::ar1_processes::{simulate_pair, Ar1Config, TruncationRule, UncertaintyRule};
use momentgap_core::moment_gap::{gap_report, CoupledArrays};
use momentgap_core::random_fields::{
    all_lambda_pairs, check_marginal_stationarity, field_gap_report, simulate_field, sup_gap,
    FieldSpec, Functional, MultiIndex,
};
use momentgap_core::sampling::{InnovationSpec, StreamKey};

fn ar1_spec(lambda_grid: Vec<i64>, n_grid: Vec<MultiIndex>) -> FieldSpec {
    FieldSpec {
        lambda_grid,
        field_dim: n_grid[0].dim(),
        n_grid,
        psi: Functional::Ar1Window { rho: 0.5, mu: 1.0 },
        phi: Functional::Ar1Truncated {
            rho: 0.5,
            mu: 1.0,
            c: 2.0,
        },
        window: 40,
        xi: InnovationSpec::Gaussian { variance: 1.0 },
        tail_tolerance: 1e-10,
    }
}

fn idx(v: &[usize]) -> MultiIndex {
    MultiIndex(v.to_vec())
}

fn key(seed: u64) -> StreamKey {
    StreamKey::new(seed, 0, 0)
}

#[test]
fn truncation_gap_matches_ar1_module_and_closed_form() {
    // n = 4: q = ceil(2 log2 4) = 4, so X - Y = sum_{j=5}^{W-1} rho^j xi
    let rho: f64 = 0.5;
    let spec = ar1_spec(vec![0, 1, 2], vec![idx(&[4])]);
    let m = 100_000;
    let field = simulate_field(&spec, &idx(&[4]), m, key(21)).unwrap();
    let w = spec.window as i32;
    let s2 = rho.powi(10) * (1.0 - rho.powi(2 * (w - 5))) / (1.0 - rho * rho);
    let oracle = (s2 * 2.0 / std::f64::consts::PI).sqrt();

    let report = field_gap_report(std::slice::from_ref(&field), 1.0).unwrap();
    for g in &report.rows[0].per_lambda {
        assert!(
            (g.gap_lr - oracle).abs() <= g.hw_lr,
            "{} vs {oracle}",
            g.gap_lr
        );
    }

    // the same discarded tail in the sequence simulator
    let cfg = Ar1Config {
        rho,
        uncertainty: UncertaintyRule::Zero,
        truncation: TruncationRule::Fixed { q: 4 },
        ..Ar1Config::default()
    };
    let s = simulate_pair(&cfg, 50, m, key(22)).unwrap();
    let tails: Vec<f64> = s.filter_tail.iter().map(|t| t.abs()).collect();
    let mean = tails.iter().sum::<f64>() / m as f64;
    let sd = (tails.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt();
    let full_tail = (rho.powi(10) / (1.0 - rho * rho) * 2.0 / std::f64::consts::PI).sqrt();
    assert!((mean - full_tail).abs() <= 3.0 * sd / (m as f64).sqrt());
    // the field window drops only |rho|^W-sized mass beyond the sequence tail
    assert!((full_tail - oracle).abs() < 1e-10);

    // X marginals agree with the stationary AR(1) law
    let x0 = field.x_column(0);
    let mx = x0.iter().sum::<f64>() / m as f64;
    let vx = x0.iter().map(|v| (v - mx).powi(2)).sum::<f64>() / (m - 1) as f64;
    let target = 1.0 / (1.0 - rho * rho);
    assert!((vx - target).abs() < 4.0 * (2.0 / m as f64).sqrt() * target);
}

#[test]
fn sup_gap_dominates_every_lambda() {
    let spec = ar1_spec((0..7).collect(), vec![idx(&[2, 3])]);
    let f = simulate_field(&spec, &idx(&[2, 3]), 500, key(1)).unwrap();
    let sup = sup_gap(&f);
    for (rep, s) in sup.iter().enumerate() {
        for pos in 0..7 {
            let d = (f.x_column(pos)[rep] - f.y_column(pos)[rep]).abs();
            assert!(*s >= d);
        }
    }
}

#[test]
fn constant_offset_sup_gap() {
    let spec = FieldSpec {
        psi: Functional::ClippedPoly {
            coefficients: vec![0.1, 1.0],
            clip: 1e9,
        },
        phi: Functional::ClippedPoly {
            coefficients: vec![0.0, 1.0],
            clip: 1e9,
        },
        ..ar1_spec(vec![0, 1, 2, 3], vec![idx(&[1])])
    };
    let f = simulate_field(&spec, &idx(&[1]), 1000, key(5)).unwrap();
    assert!(sup_gap(&f).iter().all(|g| (g - 0.1).abs() < 1e-12));
}

#[test]
fn exceedance_frequency_decreases_along_the_grid() {
    let grid: Vec<MultiIndex> = [1, 2, 4, 8].iter().map(|&n| idx(&[n])).collect();
    let spec = ar1_spec((0..5).collect(), grid.clone());
    let freq: Vec<f64> = grid
        .iter()
        .map(|n| {
            let f = simulate_field(&spec, n, 20_000, key(8)).unwrap();
            let s = sup_gap(&f);
            s.iter().filter(|&&g| g > 0.1).count() as f64 / s.len() as f64
        })
        .collect();
    assert!(freq.windows(2).all(|w| w[1] <= w[0]), "{freq:?}");
    assert!(freq[0] > 0.5 && freq[3] < 0.01, "{freq:?}");
}

#[test]
fn singleton_lambda_report_equals_scalar_report() {
    let grid: Vec<MultiIndex> = [2, 8, 32].iter().map(|&n| idx(&[n])).collect();
    let spec = ar1_spec(vec![3], grid.clone());
    let samples: Vec<_> = grid
        .iter()
        .map(|n| simulate_field(&spec, n, 3000, key(13)).unwrap())
        .collect();
    for r in [0.5, 1.0, 2.0] {
        let field = field_gap_report(&samples, r).unwrap();
        let pairs: Vec<CoupledArrays<'_>> = samples
            .iter()
            .map(|s| CoupledArrays::new(s.n.min_component() as u64, &s.x_field, &s.y_field))
            .collect();
        let scalar = gap_report(&pairs, r).unwrap();
        for (f, s) in field.rows.iter().zip(&scalar.rows) {
            assert_eq!(f.per_lambda[0], s.gap);
            assert_eq!(f.sup_gap_lr.to_bits(), s.gap.gap_lr.to_bits());
            assert_eq!(
                f.sup_gap_abs_moment.to_bits(),
                s.gap.gap_abs_moment.to_bits()
            );
            assert_eq!(f.sup_gap_norm.to_bits(), s.gap.gap_norm.to_bits());
            assert_eq!(
                f.sup_gap_mean.map(f64::to_bits),
                s.gap.gap_mean.map(f64::to_bits)
            );
        }
    }
}

#[test]
fn per_lambda_gaps_agree_within_half_widths() {
    let spec = ar1_spec((0..8).collect(), vec![idx(&[4, 4])]);
    let f = simulate_field(&spec, &idx(&[4, 4]), 20_000, key(31)).unwrap();
    let rep = field_gap_report(&[f], 1.0).unwrap();
    let per = &rep.rows[0].per_lambda;
    let pairs = all_lambda_pairs(&spec.lambda_grid);
    let within = pairs
        .iter()
        .filter(|&&(a, b)| {
            let (ga, gb) = (&per[a as usize], &per[b as usize]);
            (ga.gap_lr - gb.gap_lr).abs() <= ga.hw_lr + gb.hw_lr
        })
        .count();
    assert!(
        within as f64 >= 0.95 * pairs.len() as f64,
        "{within}/{}",
        pairs.len()
    );
}

#[test]
fn argmax_lambda_is_uniform_over_seeds() {
    let lambdas: Vec<i64> = (0..5).collect();
    let spec = ar1_spec(lambdas.clone(), vec![idx(&[2])]);
    let seeds = 200;
    let mut counts = [0usize; 5];
    for seed in 0..seeds {
        let f = simulate_field(&spec, &idx(&[2]), 400, key(1000 + seed)).unwrap();
        let rep = field_gap_report(&[f], 1.0).unwrap();
        counts[rep.rows[0].argmax_lr as usize] += 1;
    }
    let expected = seeds as f64 / 5.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // upper 1% point of chi-square with 4 degrees of freedom
    assert!(chi2 < 13.2767, "chi2 {chi2}, counts {counts:?}");
}

#[test]
fn lambda_invariant_spec_passes_stationarity_for_most_pairs() {
    let spec = ar1_spec((0..6).collect(), vec![idx(&[3, 5])]);
    let pairs = all_lambda_pairs(&spec.lambda_grid);
    let mut ok = 0;
    let mut total = 0;
    for seed in 0..10 {
        let f = simulate_field(&spec, &idx(&[3, 5]), 2000, key(seed)).unwrap();
        let checks = check_marginal_stationarity(&f, &pairs).unwrap();
        ok += checks.iter().filter(|c| c.consistent).count();
        total += checks.len();
    }
    assert!(ok as f64 >= 0.97 * total as f64, "{ok}/{total}");
}

#[test]
fn spec_errors() {
    let bad: Result<FieldSpec, _> = serde_json::from_value(serde_json::json!({
        "lambda_grid": [0], "field_dim": 1, "n_grid": [[1]], "window": 5,
        "psi": {"name": "no_such_functional"}, "phi": {"name": "constant", "c": 0.0}
    }));
    assert!(bad.is_err());

    // q(n) + 1 taps needed at n = 2^20, window 40 too short
    let spec = ar1_spec(vec![0], vec![idx(&[1 << 20])]);
    assert!(simulate_field(&spec, &idx(&[1 << 20]), 10, key(0)).is_err());
    assert!(simulate_field(
        &ar1_spec(vec![0], vec![idx(&[2])]),
        &idx(&[2, 2]),
        10,
        key(0)
    )
    .is_err());
    assert!(simulate_field(&ar1_spec(vec![0], vec![idx(&[2])]), &idx(&[2]), 0, key(0)).is_err());
}

#[test]
fn fields_are_reproducible() {
    let spec = ar1_spec((0..4).collect(), vec![idx(&[3])]);
    let a = simulate_field(&spec, &idx(&[3]), 100, key(4)).unwrap();
    let b = simulate_field(&spec, &idx(&[3]), 100, key(4)).unwrap();
    assert_eq!(a, b);
}
