use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use crsos::exact_master::{
    build_generator, evolve_times, marginal_rate_identity, one_site_marginal, write_distribution_csv,
    write_generator_csv, write_states_csv, StateDistribution,
};
use crsos::kmc::ensemble;
use crsos::lattice::{enumerate_configs, StateSpace};
use crsos::mean_field::{
    bulk_residual, mf_evolve, solve_lambda, stationary_quadratic, MeanFieldParams, StationaryAnalysis,
};
use crsos::ode::DormandPrince;
use crsos::scaling::{
    continuum_coefficient_a, epsilon_refinement, exponent_report, pde_convergence, pk_moments,
    profile_mass, similarity_ode_residual, barenblatt_f, DerivativeMode, GaussianBump, PkForm,
    SelfSimilarParams,
};
use crsos::{HeightConfig, HeightDistribution};
use serde_json::{json, Value};

use crate::compare::{compare_report, overlay_svg, CompareTolerances};
use crate::config::{Engine, ExperimentConfig, MeanFieldInit};
use crate::error::{CliError, CliResult};
use crate::manifest::{OutputRecord, RunManifest, MANIFEST_FILE, MANIFEST_FORMAT};

/// Files written into the run directory, in order.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn put(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn put_json(&mut self, name: &str, value: &impl serde::Serialize) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.put(name, text)
    }

    fn put_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> CliResult<()> {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| CliError::io(self.dir.join(name), e))?;
        self.put(name, buf)
    }
}

/// Validates `config` for `engine`, runs it, and writes the outputs and the
/// manifest into `config.out`.
pub fn run(engine: Engine, mut config: ExperimentConfig) -> CliResult<RunManifest> {
    config.validate(engine)?;
    config.resolve_rates()?;
    config.validate(engine)?;
    config.engine = Some(engine);
    let started = Instant::now();
    std::fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
    let mut out = Outputs { dir: config.out.clone(), files: Vec::new() };
    let summary = match engine {
        Engine::Enumerate => enumerate(&config, &mut out)?,
        Engine::Exact => exact(&config, &mut out)?,
        Engine::Kmc => kmc(&config, &mut out)?,
        Engine::Meanfield => meanfield(&config, &mut out)?,
        Engine::Stationary => stationary(&config, &mut out)?,
        Engine::Selfsim => selfsim(&config, &mut out)?,
        Engine::Compare => compare(&config, &mut out)?,
    };
    let outputs = out
        .files
        .iter()
        .map(|f| OutputRecord::of(&out.dir, f))
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = RunManifest {
        manifest_format: MANIFEST_FORMAT,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        engine,
        config,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        summary,
        outputs,
    };
    let path = out.dir.join(MANIFEST_FILE);
    std::fs::write(&path, manifest.to_json_string() + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

fn space_for(config: &ExperimentConfig) -> CliResult<StateSpace> {
    let (n, k) = config.lattice()?;
    Ok(enumerate_configs(n, k)?)
}

fn enumerate(config: &ExperimentConfig, out: &mut Outputs) -> CliResult<Value> {
    let space = space_for(config)?;
    out.put_with("states.csv", |w| write_states_csv(w, &space))?;
    Ok(json!({
        "n": space.n(),
        "k": space.particles(),
        "count": space.len(),
        "max_height": space.max_height(),
    }))
}

/// Average of the one-site marginals over all sites.
fn pooled_marginal(space: &StateSpace, dist: &StateDistribution) -> CliResult<HeightDistribution> {
    let n = space.n();
    let mut acc = vec![0.0; space.max_height() as usize + 1];
    for site in 0..n {
        for (a, p) in acc.iter_mut().zip(one_site_marginal(space, dist, site)?.probabilities) {
            *a += p / n as f64;
        }
    }
    Ok(HeightDistribution::new(acc, dist.time))
}

fn exact(config: &ExperimentConfig, out: &mut Outputs) -> CliResult<Value> {
    let space = space_for(config)?;
    let rates = config.rate_table();
    let init = config.initial_config()?;
    let gen = build_generator(&space, &rates)?;
    let p0 = StateDistribution::point(&space, &init)?;
    let dists = evolve_times(&gen, &p0, &config.sample_times(), &DormandPrince::default())?;

    out.put_with("states.csv", |w| write_states_csv(w, &space))?;
    out.put_with("generator.csv", |w| write_generator_csv(w, &gen))?;
    out.put_with("distribution.csv", |w| write_distribution_csv(w, &space, &dists))?;

    let mut marginals = String::from("time,site,k,probability\n");
    let mut identity = String::from("time,k,exact,two_bond\n");
    let mut samples = Vec::new();
    let symmetric = rates.is_mirror_symmetric();
    let mut worst_identity: f64 = 0.0;
    for d in &dists {
        for site in 0..space.n() {
            for (k, p) in one_site_marginal(&space, d, site)?.probabilities.iter().enumerate() {
                let _ = writeln!(marginals, "{:?},{:?},{k},{p:?}", d.time, site + 1);
            }
        }
        let report = marginal_rate_identity(&space, d, &rates, 0)?;
        for (k, (a, b)) in report.exact.iter().zip(&report.two_bond).enumerate() {
            let _ = writeln!(identity, "{:?},{k},{a:?},{b:?}", d.time);
        }
        worst_identity = worst_identity.max(report.residual);
        samples.push(json!({
            "time": d.time,
            "total": d.total(),
            "min_entry": d.min_entry(),
            "expected_particles": d.expected_particles(&space),
            "identity_residual": report.residual,
        }));
    }
    out.put("marginals.csv", marginals)?;
    out.put("identity.csv", identity)?;
    Ok(json!({
        "states": space.len(),
        "generator_nonzeros": gen.nnz(),
        "init": init.to_string(),
        "mirror_symmetric": symmetric,
        "identity_residual": worst_identity,
        // the two-bond identity only holds for mirror-symmetric tables
        "identity_pass": symmetric.then_some(worst_identity <= config.tolerances.identity),
        "samples": samples,
    }))
}

fn kmc(config: &ExperimentConfig, out: &mut Outputs) -> CliResult<Value> {
    let init = config.initial_config()?;
    let samples = config.sample_times();
    let ens = ensemble(&init, &config.rate_table(), config.t_end, &samples, config.replicas, config.seed)?;
    let s = ens.summary();
    let mut obs = String::from("time,mean_height,mean_height_se,width_sq,width_sq_se\n");
    let mut hist = String::from("time,k,fraction,se\n");
    for (i, t) in s.sample_times.iter().enumerate() {
        let (m, w) = (s.mean_height[i], s.width_sq[i]);
        let _ = writeln!(obs, "{t:?},{:?},{:?},{:?},{:?}", m.mean, m.se, w.mean, w.se);
        for (k, e) in s.one_site_hist[i].iter().enumerate() {
            let _ = writeln!(hist, "{t:?},{k},{:?},{:?}", e.mean, e.se);
        }
    }
    out.put("observables.csv", obs)?;
    out.put("histogram.csv", hist)?;
    let last = s.sample_times.len() - 1;
    Ok(json!({
        "init": init.to_string(),
        "replicas": s.replicas,
        "absorbed": s.absorbed,
        "events": ens.events(),
        "final_width_sq": s.width_sq[last],
        "final_tv_error_scale": s.tv_error_scale(last),
    }))
}

fn mean_field_params(config: &ExperimentConfig) -> CliResult<MeanFieldParams> {
    let mf = &config.mean_field;
    let rates = config.rate_table();
    let mut params = MeanFieldParams::new(mf.c.unwrap_or(rates.climb()), mf.d.unwrap_or(rates.descend()), mf.k_max)?
        .with_boundary(mf.boundary);
    params.rtol = mf.rtol.unwrap_or(params.rtol);
    params.atol = mf.atol.unwrap_or(params.atol);
    Ok(params)
}

/// Starting law for the factorized dynamics, on `0..=k_max`.
fn mean_field_init(config: &ExperimentConfig, k_max: usize) -> CliResult<HeightDistribution> {
    let law = match config.mean_field.init {
        Some(MeanFieldInit::Geometric(l)) => {
            if !(l > 0.0 && l < 1.0) {
                return Err(CliError::Config(format!("geometric init needs 0 < lambda < 1, got {l}")));
            }
            HeightDistribution::geometric(l, k_max)
        }
        Some(MeanFieldInit::Point(k)) => HeightDistribution::point_mass(k, k_max),
        None if config.init.is_some() || config.lattice().is_ok() => site_histogram(&config.initial_config()?),
        None => HeightDistribution::geometric(0.5, k_max),
    };
    if law.len() > k_max + 1 {
        return Err(CliError::Config(format!("initial law extends beyond k_max = {k_max}")));
    }
    Ok(law.padded(k_max + 1))
}

fn site_histogram(c: &HeightConfig) -> HeightDistribution {
    let max = c.heights().iter().copied().max().unwrap_or(0) as usize;
    let mut p = vec![0.0; max + 1];
    for &h in c.heights() {
        p[h as usize] += 1.0 / c.n() as f64;
    }
    HeightDistribution::new(p, 0.0)
}

fn meanfield(config: &ExperimentConfig, out: &mut Outputs) -> CliResult<Value> {
    let params = mean_field_params(config)?;
    let p0 = mean_field_init(config, params.k_max)?;
    let samples = mf_evolve(&p0, &params, config.t_end, &config.sample_times())?;
    let mut laws = String::from("time,k,probability\n");
    let mut moments = String::from("time,total,mean,variance,drift,min_entry\n");
    for s in &samples {
        let d = &s.distribution;
        for (k, p) in d.probabilities.iter().enumerate() {
            let _ = writeln!(laws, "{:?},{k},{p:?}", d.time);
        }
        let _ = writeln!(moments, "{:?},{:?},{:?},{:?},{:?},{:?}", d.time, d.total(), d.mean(), d.variance(), s.drift, s.min_entry);
    }
    out.put("meanfield.csv", laws)?;
    out.put("meanfield_moments.csv", moments)?;
    let last = samples.last().expect("at least one sample");
    Ok(json!({
        "k_max": params.k_max,
        "boundary": params.boundary,
        "c": params.c,
        "d": params.d,
        "max_drift": samples.iter().map(|s| s.drift).fold(0.0, f64::max),
        "final_mean": last.distribution.mean(),
        "final_variance": last.distribution.variance(),
        "final_min_entry": last.min_entry,
    }))
}

fn eval_quadratic(q: [f64; 3], x: f64) -> f64 {
    (q[0] * x + q[1]) * x + q[2]
}

fn stationary_csv(label: &str, a: &StationaryAnalysis, params: Option<&MeanFieldParams>, csv: &mut String) {
    for s in &a.stats {
        let residual = params.map_or(String::new(), |p| format!("{:?}", bulk_residual(s.lambda, p)));
        let _ = writeln!(
            csv,
            "{label},{:?},{:?},{:?},{:?},{residual}",
            s.lambda, s.mean_height, s.width_variance, s.width_paper
        );
    }
}

fn stationary(config: &ExperimentConfig, out: &mut Outputs) -> CliResult<Value> {
    let mut csv = String::from("triple,lambda,mean_height,width_variance,width_paper,bulk_residual\n");
    let summary = if let Some(q) = config.stationary.quadratic {
        let a = solve_lambda(q);
        stationary_csv("given", &a, None, &mut csv);
        json!({ "given": a, "lambda": a.lambda, "mean_height": a.stats.first().map(|s| s.mean_height) })
    } else {
        let params = mean_field_params(config)?;
        let triples = stationary_quadratic(&params);
        let oracle = solve_lambda(triples.oracle);
        let paper = solve_lambda(triples.paper);
        stationary_csv("oracle", &oracle, Some(&params), &mut csv);
        stationary_csv("paper", &paper, Some(&params), &mut csv);
        let at_oracle_roots: Vec<Value> = oracle
            .roots
            .iter()
            .map(|&r| {
                json!({
                    "root": r,
                    "oracle_value": eval_quadratic(triples.oracle, r),
                    "paper_value": eval_quadratic(triples.paper, r),
                    "bulk_residual": (r != 0.0).then(|| bulk_residual(r, &params)),
                })
            })
            .collect();
        let agree = oracle.roots.len() == paper.roots.len()
            && oracle.roots.iter().zip(&paper.roots).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        json!({
            "c": params.c,
            "d": params.d,
            "oracle": oracle,
            "paper": paper,
            "roots_agree": agree,
            "at_oracle_roots": at_oracle_roots,
            "lambda": oracle.lambda,
            "mean_height": oracle.lambda.map(|_| oracle.stats[0].mean_height),
        })
    };
    out.put("stationary.csv", csv)?;
    out.put_json("stationary.json", &summary)?;
    Ok(summary)
}

fn selfsim(config: &ExperimentConfig, out: &mut Outputs) -> CliResult<Value> {
    let ss = &config.selfsim;
    let rate_params = mean_field_params(config)?;
    let derived_a = continuum_coefficient_a(&rate_params);
    let a = ss.a.unwrap_or(derived_a);
    if !(a > 0.0 && a.is_finite()) {
        return Err(CliError::Config(format!(
            "the continuum coefficient is {a}; the profile needs A > 0 (set selfsim.a or choose rates with more climbs)"
        )));
    }
    let p = match ss.c1 {
        Some(c1) => SelfSimilarParams::new(a, c1, ss.epsilon),
        None => SelfSimilarParams::normalized(a, ss.epsilon)?,
    };
    let edge = p.support_edge();
    let xs: Vec<f64> = (0..=200).map(|i| -0.99 * edge + 1.98 * edge * f64::from(i) / 200.0).collect();
    let ode_analytic = similarity_ode_residual(&p, &xs, DerivativeMode::Analytic)?;
    let h = 1e-5 * edge;
    let inner: Vec<f64> = xs.iter().map(|x| x * 0.98).collect();
    let ode_fd = similarity_ode_residual(&p, &inner, DerivativeMode::FiniteDifference { h })?;
    let perturbed = SelfSimilarParams { gamma: 0.2, ..p };
    let ode_perturbed = similarity_ode_residual(&perturbed, &xs, DerivativeMode::Analytic)?;

    let ls: Vec<f64> = [-0.6, -0.2, 0.0, 0.3, 0.6].iter().map(|f| f * edge).collect();
    let (pde_rows, pde_orders) = pde_convergence(&p, &ls, &[0.5, 1.0, 3.0], 0.01 * edge, 4)?;

    let refinement = if derived_a != 0.0 {
        Some(epsilon_refinement(&rate_params, &GaussianBump::default(), &ss.refinement_epsilons, &ss.probes)?)
    } else {
        None
    };
    let report = exponent_report(&p, &ss.times, ss.domain)?;

    let mut profile = String::from("x,f\n");
    for i in 0..=200 {
        let x = -edge + 2.0 * edge * f64::from(i) / 200.0;
        let _ = writeln!(profile, "{x:?},{:?}", barenblatt_f(x, &p)?);
    }
    out.put("profile.csv", profile)?;
    let mut moments = String::from("form,time,mass,first_moment,mean,variance,support\n");
    for (label, form) in [("printed", PkForm::Printed), ("consistent", PkForm::Consistent)] {
        for &t in &ss.times {
            let m = pk_moments(&p, t, form, ss.domain)?;
            let _ = writeln!(moments, "{label},{t:?},{:?},{:?},{:?},{:?},{:?}", m.mass, m.first_moment, m.mean, m.variance, m.support);
        }
    }
    out.put("moments.csv", moments)?;

    let summary = json!({
        "params": p,
        "a_from_rates": derived_a,
        "profile_mass": profile_mass(&p)?,
        "ode_residual_analytic": ode_analytic,
        "ode_residual_finite_difference": ode_fd,
        "ode_residual_gamma_one_fifth": ode_perturbed,
        "pde_residuals": pde_rows,
        "pde_orders": pde_orders,
        "refinement": refinement,
        "exponents": report,
    });
    out.put_json("selfsim.json", &summary)?;
    Ok(summary)
}

fn compare(config: &ExperimentConfig, out: &mut Outputs) -> CliResult<Value> {
    let space = space_for(config)?;
    let rates = config.rate_table();
    let init = config.initial_config()?;
    let t = config.t_end;

    let gen = build_generator(&space, &rates)?;
    let p0 = StateDistribution::point(&space, &init)?;
    let pt = evolve_times(&gen, &p0, &[t], &DormandPrince::default())?.pop().expect("one sample");
    let exact = pooled_marginal(&space, &pt)?;

    let ens = ensemble(&init, &rates, t, &[t], config.replicas, config.seed)?.summary();
    let kmc = ens.histogram(0);
    let envelope = ens.tv_error_scale(0);

    let params = mean_field_params(config)?;
    let mf0 = mean_field_init(config, params.k_max)?;
    let mf = mf_evolve(&mf0, &params, t, &[t])?.pop().expect("one sample").distribution;

    let tol = &config.tolerances;
    let tolerances = CompareTolerances { kmc: tol.tv.max(tol.sigmas * envelope), mean_field: tol.mean_field_tv };
    let report = compare_report(&exact, &kmc, &mf, tolerances);
    out.put("compare.csv", report.csv())?;
    let provenance = format!(
        "crsos compare: n={}, K={}, init={init}, t={t}, replicas={}, seed={}",
        space.n(),
        space.particles(),
        config.replicas,
        config.seed
    );
    out.put("compare.svg", overlay_svg(&report, &provenance))?;
    let summary = json!({
        "time": t,
        "replicas": config.replicas,
        "tv_exact_kmc": report.tv_exact_kmc,
        "tv_exact_mean_field": report.tv_exact_mean_field,
        "tv_kmc_mean_field": report.tv_kmc_mean_field,
        "statistical_envelope": envelope,
        "tolerances": report.tolerances,
        "pass": report.pass,
    });
    out.put_json("compare.json", &report)?;
    Ok(summary)
}
