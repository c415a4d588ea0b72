//! End-to-end acceptance checks, one line per criterion.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use crsos::exact_master::{
    build_generator, evolve_times, marginal_rate_identity, one_site_marginal, uniformization, StateDistribution,
};
use crsos::kmc::ensemble;
use crsos::lattice::{enumerate_configs, is_restricted, HeightConfig, RateTable};
use crsos::mean_field::{bulk_residual, geometric_stats, solve_lambda, stationary_quadratic, MeanFieldParams};
use crsos::ode::DormandPrince;
use crsos::scaling::{
    continuum_coefficient_a, epsilon_refinement, exponent_report, fit_exponent, pde_convergence,
    similarity_ode_residual, DerivativeMode, GaussianBump, KDomain, SelfSimilarParams,
};
use crsos::HeightDistribution;
use crsos_cli::{run, Engine, ExperimentConfig, MANIFEST_FILE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Outcome {
    pass: bool,
    detail: String,
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
        }
        o.detail.push_str(&format!("; {:.2}s of {}s", took.as_secs_f64(), limit.as_secs()));
    } else {
        o.detail.push_str(&format!("; {:.2}s", took.as_secs_f64()));
    }
    o
}

fn random_table(rng: &mut ChaCha8Rng) -> RateTable {
    let mut t = RateTable::zero();
    for dep in 1..=4 {
        for arr in 1..=4 {
            t.set_span2(dep, arr, rng.random_range(0.0..2.0));
        }
    }
    t.set_span1(rng.random_range(0.0..2.0));
    t
}

fn brute_force(n: usize, k: u64) -> BTreeSet<Vec<u32>> {
    let mut out = BTreeSet::new();
    let mut stack = vec![Vec::<u32>::new()];
    while let Some(prefix) = stack.pop() {
        let used: u64 = prefix.iter().map(|&h| u64::from(h)).sum();
        if prefix.len() == n - 1 {
            let mut full = prefix.clone();
            full.push((k - used) as u32);
            if is_restricted(&full.iter().map(|&h| i64::from(h)).collect::<Vec<_>>()) {
                out.insert(full);
            }
            continue;
        }
        for h in 0..=(k - used) {
            let mut next = prefix.clone();
            next.push(h as u32);
            stack.push(next);
        }
    }
    out
}

fn c1_enumeration() -> Outcome {
    let mut cases = 0;
    let mut bad = Vec::new();
    for n in 1..=6 {
        for k in 0..=8 {
            cases += 1;
            let space = enumerate_configs(n, k).unwrap();
            let got: BTreeSet<Vec<u32>> = space.configs().iter().map(|c| c.heights().to_vec()).collect();
            if got.len() != space.len() || got != brute_force(n, k) {
                bad.push((n, k));
            }
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("{cases} (n, K) pairs, mismatches {bad:?}") }
}

fn c2_generator() -> Outcome {
    let space = enumerate_configs(6, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_sum, mut min_off): (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..20 {
        let g = build_generator(&space, &random_table(&mut rng)).unwrap();
        for k in 0..g.dimension() {
            worst_sum = worst_sum.max(g.row_sum(k).abs());
            for &(_, r) in g.row(k) {
                min_off = min_off.min(r);
            }
        }
    }
    Outcome {
        pass: worst_sum <= 1e-12 && min_off >= 0.0,
        detail: format!("20 tables, max |row sum| {worst_sum:.2e}, min off-diagonal {min_off:.3}"),
    }
}

fn c3_forward() -> Outcome {
    let space = enumerate_configs(6, 6).unwrap();
    let g = build_generator(&space, &RateTable::unit()).unwrap();
    let p0 = StateDistribution::point(&space, &HeightConfig::flat(6, 1)).unwrap();
    let times: Vec<f64> = (1..=40).map(|i| 0.05 * f64::from(i)).collect();
    let path = evolve_times(&g, &p0, &times, &DormandPrince::default()).unwrap();
    let drift = path.iter().map(|p| (p.total() - 1.0).abs()).fold(0.0, f64::max);
    let min = path.iter().map(|p| p.min_entry()).fold(f64::INFINITY, f64::min);
    let oracle = uniformization(&g, &p0, 2.0, 1e-16).unwrap();
    let last = path.last().unwrap();
    let diff = last
        .probabilities
        .iter()
        .zip(&oracle.probabilities)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Outcome {
        pass: drift <= 1e-9 && min >= -1e-9 && diff <= 1e-7,
        detail: format!("max |sum - 1| {drift:.2e}, min P {min:.2e}, max |P - oracle| at t=2 {diff:.2e}"),
    }
}

fn c4_kmc_vs_exact() -> Outcome {
    let space = enumerate_configs(6, 6).unwrap();
    let init = HeightConfig::flat(6, 1);
    let g = build_generator(&space, &RateTable::unit()).unwrap();
    let p0 = StateDistribution::point(&space, &init).unwrap();
    let pt = evolve_times(&g, &p0, &[1.0], &DormandPrince::default()).unwrap().pop().unwrap();
    let exact = one_site_marginal(&space, &pt, 0).unwrap();
    let s = ensemble(&init, &RateTable::unit(), 1.0, &[1.0], 100_000, 20_240_601).unwrap().summary();
    let tv = s.histogram(0).total_variation(&exact);
    let envelope = 3.0 * s.tv_error_scale(0);
    let bound = envelope.max(0.01);
    Outcome {
        pass: tv <= bound,
        detail: format!("TV {tv:.2e} <= max(0.01, 3 x envelope {:.2e}) = {bound:.2e}", envelope / 3.0),
    }
}

fn c5_identity() -> Outcome {
    let space = enumerate_configs(6, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tables = vec![RateTable::unit()];
    tables.extend((0..5).map(|_| random_table(&mut rng)));
    let flat = StateDistribution::point(&space, &HeightConfig::flat(6, 1)).unwrap();
    let uniform = StateDistribution::uniform(&space);
    let lopsided = StateDistribution::point(&space, &"(1,2,1,1,0,1)".parse().unwrap()).unwrap();
    let (mut worst, mut scale, mut off_symmetry): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for rates in &tables {
        assert!(rates.is_mirror_symmetric());
        let g = build_generator(&space, rates).unwrap();
        let times = [0.0, 0.2, 1.0, 2.0];
        for p0 in [&flat, &uniform] {
            for p in evolve_times(&g, p0, &times, &DormandPrince::default()).unwrap() {
                for site in 0..6 {
                    let r = marginal_rate_identity(&space, &p, rates, site).unwrap();
                    worst = worst.max(r.residual);
                    scale = r.exact.iter().fold(scale, |m, x| m.max(x.abs()));
                }
            }
        }
        // the doubled right-bond flux stands in for the left bonds only when
        // the law is reflection-symmetric about the site
        for p in evolve_times(&g, &lopsided, &times, &DormandPrince::default()).unwrap() {
            off_symmetry = off_symmetry.max(marginal_rate_identity(&space, &p, rates, 0).unwrap().residual);
        }
    }
    let dir = TempDir::new().unwrap();
    let mut cfg = ExperimentConfig::from_json_str(r#"{"n": 6, "k": 6, "rates": {"right.span1": 1.5, "left.span2.d1.a1": 0.3}}"#).unwrap();
    cfg.out = dir.path().to_path_buf();
    let m = run(Engine::Exact, cfg).unwrap();
    let reported = m.summary["identity_residual"].as_f64();
    Outcome {
        pass: worst <= 1e-8 && scale > 0.1 && reported.is_some(),
        detail: format!(
            "{} symmetric tables from flat and uniform starts, max residual {worst:.2e} (max |dP/dt| {scale:.2}); informational: asymmetric table {:.3e} (in manifest), asymmetric start {off_symmetry:.3e}",
            tables.len(),
            reported.unwrap_or(f64::NAN)
        ),
    }
}

fn c6_stationary() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut tables, mut roots, mut worst) = (0, 0, 0.0f64);
    let (mut paper_zero, mut paper_nonzero, mut same_roots) = (0, 0, 0);
    while tables < 50 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..2.0));
        let d: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..2.0));
        if c[1] == d[1] {
            continue;
        }
        tables += 1;
        let params = MeanFieldParams::new(c, d, 60).unwrap();
        let q = stationary_quadratic(&params);
        let oracle = solve_lambda(q.oracle);
        let paper = solve_lambda(q.paper);
        if oracle.roots == paper.roots {
            same_roots += 1;
        }
        for &r in &oracle.roots_in_unit {
            roots += 1;
            worst = worst.max(bulk_residual(r, &params).abs());
            let v = (q.paper[0] * r + q.paper[1]) * r + q.paper[2];
            if v.abs() <= 1e-10 {
                paper_zero += 1;
            } else {
                paper_nonzero += 1;
            }
        }
    }
    Outcome {
        pass: roots > 0 && worst <= 1e-10,
        detail: format!(
            "{tables} tables, {roots} roots in (0,1), max |bulk residual| {worst:.2e}; printed triple vanishes at {paper_zero}/{} of them, identical real-root sets (including none) in {same_roots}/{tables} tables",
            paper_zero + paper_nonzero
        ),
    }
}

fn c7_geometric() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for lambda in [0.1, 0.5, 0.9] {
        let s = geometric_stats(lambda).unwrap();
        let p = HeightDistribution::geometric(lambda, 2000);
        worst = worst.max((p.mean() - s.mean_height).abs()).max((p.variance() - s.width_variance).abs());
        lines.push(format!("lambda {lambda}: var {:.4} vs printed w^2 {:.4}", s.width_variance, s.width_paper));
    }
    Outcome { pass: worst <= 1e-10, detail: format!("max deviation {worst:.2e}; {}", lines.join(", ")) }
}

fn c8_continuum() -> Outcome {
    let eps = [0.1, 0.05, 0.025, 0.0125];
    let probes = [2.0, 2.5, 3.0, 3.5, 4.0];
    let params = MeanFieldParams::new([1.0, 0.6, 0.9, 0.5], [0.5, 0.4, 0.7, 0.9], 10).unwrap();
    let r = epsilon_refinement(&params, &GaussianBump::default(), &eps, &probes).unwrap();
    let min_order = r.orders.iter().copied().fold(f64::INFINITY, f64::min);
    let generic = MeanFieldParams::new([1.0, 0.9, 0.3, 0.5], [0.5, 0.4, 0.7, 0.4], 10).unwrap();
    let g = epsilon_refinement(&generic, &GaussianBump::default(), &eps, &probes).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut zero_ok = true;
    for _ in 0..100 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..3.0));
        zero_ok &= continuum_coefficient_a(&MeanFieldParams::new(c, c, 10).unwrap()) == 0.0;
        let d: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..3.0));
        zero_ok &= continuum_coefficient_a(&MeanFieldParams::new(c, d, 10).unwrap()) != 0.0;
    }
    Outcome {
        pass: min_order >= 1.8 && zero_ok,
        detail: format!(
            "A = {}, orders {:?}; A = 0 iff c = d on 100 draws: {zero_ok}; generic rates (B = {:.2}) orders {:?}",
            r.a,
            r.orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>(),
            g.drift,
            g.orders.iter().map(|o| (o * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    }
}

fn c9_self_similar() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut power = true;
    for a in [0.1, 1.0, 10.0] {
        for c1 in [0.5, 1.0, 4.0] {
            let p = SelfSimilarParams::new(a, c1, 0.1);
            let edge = p.support_edge();
            let xs: Vec<f64> = (0..=400).map(|i| -0.999 * edge + 1.998 * edge * f64::from(i) / 400.0).collect();
            worst = worst.max(similarity_ode_residual(&p, &xs, DerivativeMode::Analytic).unwrap());
            let perturbed = SelfSimilarParams { gamma: 0.2, ..p };
            power &= similarity_ode_residual(&perturbed, &xs, DerivativeMode::Analytic).unwrap() > 1e-3;
        }
    }
    let p = SelfSimilarParams::new(1.0, 1.0, 0.1);
    let (_, orders) = pde_convergence(&p, &[-1.5, -0.5, 0.0, 0.7, 1.5], &[0.5, 1.0, 3.0], 0.04, 4).unwrap();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    Outcome {
        pass: worst <= 1e-10 && min_order >= 1.8 && power,
        detail: format!(
            "ODE residual {worst:.2e} over 9 (A, C1); PDE orders {:?}; gamma = 1/5 detected: {power}",
            orders.iter().map(|o| (o * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ),
    }
}

fn c10_exponents() -> Outcome {
    let mut planted = 0.0f64;
    for b in [1.0 / 12.0, 1.0 / 6.0, 0.25, 1.0 / 3.0] {
        let series: Vec<(f64, f64)> = (0..=10).map(|i| (2f64.powi(i), 0.8 * 2f64.powi(i).powf(b))).collect();
        planted = planted.max((fit_exponent(&series).unwrap().slope - b).abs());
    }
    let p = SelfSimilarParams::normalized(1.0, 1e-3).unwrap();
    let times: Vec<f64> = (0..=10).map(|i| 2f64.powi(i)).collect();
    let r = exponent_report(&p, &times, KDomain::Nonnegative).unwrap();
    let pr = &r.printed;
    let (mean, var) = (pr.mean.unwrap(), pr.variance);
    let r2 = mean.r_squared.min(var.r_squared);
    Outcome {
        pass: planted <= 1e-12 && r2 >= 0.999,
        detail: format!(
            "planted error {planted:.1e}; printed P_k(t): mean ~ t^{:.4}, variance ~ t^{:.4}, mass ~ t^{:.4}, first moment ~ t^{:.4} (r^2 >= {r2:.6}); stated {:.4} / {:.4}, similarity {:.4} / {:.4}",
            mean.slope,
            var.slope,
            pr.mass.slope,
            pr.first_moment.unwrap().slope,
            r.stated.mean_height,
            r.stated.width_sq,
            r.similarity.mean_height,
            r.similarity.width_sq
        ),
    }
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn c11_reproducibility() -> Outcome {
    let mut checked = 0;
    let mut same = true;
    for (engine, doc) in [
        (Engine::Kmc, r#"{"n": 10, "k": 14, "replicas": 1000, "seed": 7, "samples": [0.5, 1.0, 2.0], "t_end": 2.0}"#),
        (Engine::Exact, r#"{"n": 6, "k": 8, "samples": [0.5, 1.0]}"#),
        (Engine::Compare, r#"{"n": 6, "k": 6, "replicas": 5000, "seed": 3}"#),
        (Engine::Meanfield, r#"{"n": 6, "k": 6, "mean_field": {"k_max": 40}}"#),
    ] {
        let a = TempDir::new().unwrap();
        let mut cfg = ExperimentConfig::from_json_str(doc).unwrap();
        cfg.out = a.path().to_path_buf();
        run(engine, cfg).unwrap();
        // second run straight from the first run's manifest
        let b = TempDir::new().unwrap();
        let mut again = ExperimentConfig::load(&a.path().join(MANIFEST_FILE)).unwrap();
        again.out = b.path().to_path_buf();
        run(engine, again).unwrap();
        let (x, y) = (csv_files(a.path()), csv_files(b.path()));
        checked += x.len();
        same &= !x.is_empty() && x == y;
    }
    Outcome { pass: same, detail: format!("{checked} CSV files byte-identical across repeated runs: {same}") }
}

#[test]
fn acceptance() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria: Vec<(&str, Option<Duration>, fn() -> Outcome)> = vec![
        ("enumeration oracle", secs(10), c1_enumeration),
        ("generator sanity", secs(5), c2_generator),
        ("forward-equation conservation", secs(30), c3_forward),
        ("KMC vs exact", secs(300), c4_kmc_vs_exact),
        ("two-bond marginal identity", None, c5_identity),
        ("stationary mean field", secs(5), c6_stationary),
        ("geometric statistics", None, c7_geometric),
        ("continuum coefficient", secs(10), c8_continuum),
        ("self-similar closed form", secs(10), c9_self_similar),
        ("exponent machinery", None, c10_exponents),
        ("reproducibility", None, c11_reproducibility),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let o = timed(limit, f);
        println!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
