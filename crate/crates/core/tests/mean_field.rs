use crsos::mean_field::{
    bracket_values, bulk_residual, geometric_stats, mf_evolve, quadratic_roots, solve_lambda,
    stationary_quadratic, truncation_discrepancy, BoundaryTerms, MeanFieldParams, Phase,
};
use crsos::HeightDistribution;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng) -> MeanFieldParams {
    let mut r = || rng.random_range(0.0..2.0);
    MeanFieldParams::new([r(), r(), r(), r()], [r(), r(), r(), r()], 60).unwrap()
}

#[test]
fn geometric_bracket_scales_as_lambda_to_the_fifth_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let params = random_params(&mut rng);
        for lambda in [0.2, 0.5, 0.8] {
            let p = HeightDistribution::geometric(lambda, params.k_max);
            let f = bracket_values(&p.probabilities, &params);
            let g = |k: usize| f[k] / lambda.powi(5 * k as i32);
            let g2 = g(2);
            let top = if lambda > 0.5 { params.k_max - 2 } else { 30 };
            for k in 3..=top {
                assert!((g(k) - g2).abs() <= 1e-9 * g2.abs().max(1e-3), "k={k}: {} vs {g2}", g(k));
            }
        }
    }
}

/// The residual on the geometric law is the oracle quadratic divided by lambda.
#[test]
fn residual_is_the_oracle_quadratic() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let params = random_params(&mut rng);
        let [q2, q1, q0] = stationary_quadratic(&params).oracle;
        for x in [0.1, 0.37, 0.9] {
            let expect = (q2 * x * x + q1 * x + q0) / x;
            assert!((bulk_residual(x, &params) - expect).abs() < 1e-12 * (1.0 + expect.abs()));
        }
    }
}

#[test]
fn oracle_roots_are_stationary() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 50 {
        let params = random_params(&mut rng);
        if params.c[1] == params.d[1] {
            continue;
        }
        checked += 1;
        let q = stationary_quadratic(&params).oracle;
        for r in solve_lambda(q).roots_in_unit {
            assert!(bulk_residual(r, &params).abs() <= 1e-10);
        }
        for r in quadratic_roots(q) {
            let v = q[0] * r * r + q[1] * r + q[2];
            let scale = q.iter().map(|c| c.abs()).sum::<f64>() * (1.0 + r * r);
            assert!(v.abs() <= 1e-12 * scale, "root {r} leaves {v}");
        }
    }
}

#[test]
fn one_root_condition_implies_one_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut hits = 0;
    for _ in 0..2000 {
        let params = random_params(&mut rng);
        let a = solve_lambda(stationary_quadratic(&params).oracle);
        if a.one_root_condition {
            hits += 1;
            assert_eq!(a.phase, Phase::OneRoot, "{:?}", a.quad_coeffs);
            assert!(a.lambda.is_some());
        }
    }
    assert!(hits > 100);
}

#[test]
fn worked_quadratic() {
    let a = solve_lambda([1.0, -1.5, 0.5]);
    assert_eq!(a.roots, vec![0.5, 1.0]);
    assert_eq!(a.lambda, Some(0.5));
    assert!((a.stats[0].mean_height - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn roots_are_scale_invariant(q2 in -5.0f64..5.0, q1 in -5.0f64..5.0, q0 in -5.0f64..5.0, s in 1e-3f64..1e3) {
        prop_assume!(q2.abs() > 1e-3);
        let a = quadratic_roots([q2, q1, q0]);
        let b = quadratic_roots([s * q2, s * q1, s * q0]);
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-13 * (1.0 + x.abs()));
        }
    }
}

#[test]
fn geometric_statistics_match_truncated_sums() {
    for lambda in [0.1, 0.5, 0.9] {
        let s = geometric_stats(lambda).unwrap();
        let p = HeightDistribution::geometric(lambda, 2000);
        assert!((p.mean() - s.mean_height).abs() <= 1e-10);
        assert!((p.variance() - s.width_variance).abs() <= 1e-10);
    }
}

#[test]
fn conservative_boundary_conserves_mass() {
    let params = MeanFieldParams::new([1.0, 0.7, 1.3, 0.4], [0.9, 1.1, 0.6, 0.8], 80)
        .unwrap()
        .with_boundary(BoundaryTerms::Conservative);
    let p0 = HeightDistribution::geometric(0.5, 80);
    for s in mf_evolve(&p0, &params, 1.0, &[0.25, 0.5, 1.0]).unwrap() {
        assert!(s.drift <= 1e-9, "drift {}", s.drift);
        assert_eq!(s.drift, (s.distribution.total() - 1.0).abs());
    }
}

#[test]
fn equal_rates_report_their_drift() {
    let params = MeanFieldParams::new([1.0; 4], [1.0; 4], 60).unwrap();
    let p0 = HeightDistribution::geometric(0.4, 60);
    let out = mf_evolve(&p0, &params, 1.0, &[0.0, 0.5, 1.0]).unwrap();
    assert_eq!(out[0].drift, (p0.total() - 1.0).abs());
    for s in &out {
        assert_eq!(s.drift, (s.distribution.total() - 1.0).abs());
        assert_eq!(s.min_entry, s.distribution.min_entry());
    }
}

#[test]
fn truncation_is_converged() {
    let params = MeanFieldParams::new([1.0, 0.7, 1.3, 0.4], [0.9, 1.1, 0.6, 0.8], 100).unwrap();
    let p0 = HeightDistribution::geometric(0.5, 100);
    assert!(truncation_discrepancy(&p0, &params, 1.0).unwrap() <= 1e-8);
}
