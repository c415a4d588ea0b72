use std::collections::HashMap;

use crsos::exact_master::{build_generator, evolve_forward, one_site_marginal, StateDistribution};
use crsos::kmc::{ensemble, kmc_step, simulate, TrajectoryState};
use crsos::lattice::{enumerate_configs, is_restricted, list_moves, HeightConfig, RateTable};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const DRAWS: usize = 100_000;

fn skewed() -> RateTable {
    let mut t = RateTable::unit();
    t.set_span2(1, 1, 0.3);
    t.set_span2(2, 4, 2.5);
    t.set_span2(4, 4, 1.7);
    t.set_span1(0.8);
    t
}

#[test]
fn site_selection_is_uniform_on_a_flat_ring() {
    let n = 16;
    let init = HeightConfig::new(vec![2; n]).unwrap();
    let mut state = TrajectoryState::new(&init, &RateTable::unit(), 11).unwrap();
    let mut counts = vec![0f64; n];
    for _ in 0..DRAWS {
        counts[state.draw_event().unwrap().mv.source] += 1.0;
    }
    let expected = DRAWS as f64 / n as f64;
    let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new((n - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 1e-3, "chi2 = {chi2}, p = {p}");
}

#[test]
fn jump_chain_frequencies_match_rates() {
    let init: HeightConfig = "(2,1,1,2,3,3,2,2)".parse().unwrap();
    let rates = skewed();
    let moves = list_moves(&init, &rates);
    assert!(moves.len() > 4);
    let total: f64 = moves.iter().map(|m| m.rate).sum();
    let mut state = TrajectoryState::new(&init, &rates, 3).unwrap();
    assert!((state.total_rate() - total).abs() < 1e-12);
    let mut counts: HashMap<(usize, i8), f64> = HashMap::new();
    for _ in 0..DRAWS {
        let s = state.draw_event().unwrap();
        *counts.entry((s.mv.source, s.mv.offset)).or_default() += 1.0;
    }
    assert_eq!(counts.len(), moves.len());
    let n = DRAWS as f64;
    for m in &moves {
        let p = m.rate / total;
        let got = counts[&(m.source, m.offset)] / n;
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((got - p).abs() <= 4.0 * sigma, "{m:?}: {got} vs {p}");
    }
}

/// Asymptotic Kolmogorov distribution tail with the Stephens correction.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        sum += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    sum.clamp(0.0, 1.0)
}

#[test]
fn waiting_times_are_exponential() {
    let init: HeightConfig = "(2,1,1,2,3,3,2,2)".parse().unwrap();
    let mut state = TrajectoryState::new(&init, &skewed(), 17).unwrap();
    let rate = state.total_rate();
    let mut w: Vec<f64> = (0..DRAWS).map(|_| state.draw_event().unwrap().waiting_time).collect();
    w.sort_by(f64::total_cmp);
    let n = w.len() as f64;
    let d = w
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    let p = ks_p_value(d, w.len());
    assert!(p > 1e-3, "D = {d}, p = {p}");

    // the wrong rate is detected
    let d_wrong = w
        .iter()
        .enumerate()
        .map(|(i, &x)| ((1.0 - (-1.1 * rate * x).exp()) - i as f64 / n).abs())
        .fold(0.0, f64::max);
    assert!(ks_p_value(d_wrong, w.len()) < 1e-3);
}

#[test]
fn every_visited_state_is_admissible() {
    let init = HeightConfig::new(vec![3; 12]).unwrap();
    let mut state = TrajectoryState::new(&init, &skewed(), 5).unwrap();
    for _ in 0..20_000 {
        kmc_step(&mut state).unwrap();
        let hs: Vec<i64> = state.heights().iter().map(|&h| i64::from(h)).collect();
        assert!(is_restricted(&hs));
        assert_eq!(hs.iter().sum::<i64>(), 36);
    }
    assert_eq!(state.cached_site_rates(), state.recomputed_site_rates());
}

#[test]
fn histogram_approaches_exact_marginal() {
    for (init, rates) in [
        ("(1,1,1,1,1,1)", RateTable::unit()),
        ("(1,2,2,1,1)", skewed()),
        ("(2,1,0,1,2,2)", skewed()),
    ] {
        let init: HeightConfig = init.parse().unwrap();
        // the histogram pools all sites, so compare with the site-averaged marginal
        let space = enumerate_configs(init.n(), init.total()).unwrap();
        let g = build_generator(&space, &rates).unwrap();
        let p = evolve_forward(&g, &StateDistribution::point(&space, &init).unwrap(), 1.0).unwrap();
        let mut avg = vec![0.0; space.max_height() as usize + 1];
        for site in 0..init.n() {
            for (a, x) in avg.iter_mut().zip(one_site_marginal(&space, &p, site).unwrap().probabilities) {
                *a += x / init.n() as f64;
            }
        }
        let summary = ensemble(&init, &rates, 1.0, &[1.0], 20_000, 99).unwrap().summary();
        let hist = summary.histogram(0);
        let exact = crsos::HeightDistribution::new(avg, 1.0);
        let tv = hist.total_variation(&exact);
        let envelope = 3.0 * summary.tv_error_scale(0);
        assert!(tv <= envelope.max(0.01), "{init}: tv {tv} vs {envelope}");
    }
}

#[test]
fn standard_error_shrinks_like_root_n() {
    let init = HeightConfig::new(vec![1; 6]).unwrap();
    let a = ensemble(&init, &RateTable::unit(), 1.0, &[1.0], 4_000, 1).unwrap().summary();
    let b = ensemble(&init, &RateTable::unit(), 1.0, &[1.0], 8_000, 1).unwrap().summary();
    let ratio = b.width_sq[0].se / a.width_sq[0].se;
    assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn seeded_runs_replay_exactly() {
    let init = HeightConfig::new(vec![2; 20]).unwrap();
    let samples = [0.5, 1.0, 3.0];
    let a = simulate(&init, &skewed(), 3.0, &samples, 42).unwrap();
    let b = simulate(&init, &skewed(), 3.0, &samples, 42).unwrap();
    assert_eq!(a, b);
    let c = simulate(&init, &skewed(), 3.0, &samples, 43).unwrap();
    assert_ne!(a.width_sq, c.width_sq);
    let e1 = ensemble(&init, &skewed(), 3.0, &samples, 600, 8).unwrap();
    let e2 = ensemble(&init, &skewed(), 3.0, &samples, 600, 8).unwrap();
    assert_eq!(e1, e2);
}
