//! Experiment configuration: one JSON document, with command-line flags
//! taking precedence over the fields they name.

use std::fmt;
use std::path::{Path, PathBuf};

use crsos::mean_field::BoundaryTerms;
use crsos::scaling::KDomain;
use crsos::{HeightConfig, RateTable};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Enumerate,
    Exact,
    Kmc,
    Meanfield,
    Stationary,
    Selfsim,
    Compare,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Enumerate => "enumerate",
            Engine::Exact => "exact",
            Engine::Kmc => "kmc",
            Engine::Meanfield => "meanfield",
            Engine::Stationary => "stationary",
            Engine::Selfsim => "selfsim",
            Engine::Compare => "compare",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A rate table given inline or as a path to a JSON file. Relative paths in a
/// config file resolve against the file's directory.
#[derive(Debug, Clone, PartialEq)]
pub enum RatesSource {
    Inline(RateTable),
    Path(PathBuf),
}

impl Default for RatesSource {
    fn default() -> Self {
        RatesSource::Inline(RateTable::unit())
    }
}

impl Serialize for RatesSource {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RatesSource::Inline(t) => t.serialize(s),
            RatesSource::Path(p) => p.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for RatesSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(p) => Ok(RatesSource::Path(p.into())),
            v => RateTable::deserialize(v).map(RatesSource::Inline).map_err(D::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanFieldInit {
    /// `(1 - lambda) lambda^k`.
    Geometric(f64),
    Point(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Floor of the KMC-vs-exact total-variation tolerance.
    pub tv: f64,
    /// Multiple of the statistical envelope allowed above the floor.
    pub sigmas: f64,
    /// Bound on the two-bond identity residual for mirror-symmetric tables.
    pub identity: f64,
    /// Optional bound on the mean-field-vs-exact distance; unchecked if absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_field_tv: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tv: 0.01, sigmas: 3.0, identity: 1e-8, mean_field_tv: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeanFieldSection {
    pub k_max: usize,
    pub boundary: BoundaryTerms,
    /// Defaults to the one-site histogram of the initial configuration when
    /// the lattice is given, else to the geometric law with `lambda = 0.5`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<MeanFieldInit>,
    /// Climb and descend rates; taken from the rate table when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<[f64; 4]>,
    /// Integrator tolerances; library defaults when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
}

impl Default for MeanFieldSection {
    fn default() -> Self {
        Self { k_max: 200, boundary: BoundaryTerms::default(), init: None, c: None, d: None, rtol: None, atol: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationarySection {
    /// `(q2, q1, q0)` to analyse directly instead of deriving it from rates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfSimSection {
    /// Continuum coefficient; derived from the rates when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Profile constant; chosen for unit mass when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub domain: KDomain,
    pub refinement_epsilons: Vec<f64>,
    pub probes: Vec<f64>,
}

impl Default for SelfSimSection {
    fn default() -> Self {
        Self {
            a: None,
            c1: None,
            epsilon: 1e-3,
            times: (0..=10).map(|i| 2f64.powi(i)).collect(),
            domain: KDomain::Nonnegative,
            refinement_epsilons: vec![0.1, 0.05, 0.025, 0.0125],
            probes: vec![2.0, 2.5, 3.0, 3.5, 4.0],
        }
    }
}

fn default_t_end() -> f64 {
    1.0
}

fn default_replicas() -> u64 {
    1000
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Set by the subcommand; a value in the file must agree with it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default)]
    pub rates: RatesSource,
    /// Initial heights; the most nearly flat configuration when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<HeightConfig>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Sample times; `[t_end]` when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub mean_field: MeanFieldSection,
    #[serde(default)]
    pub stationary: StationarySection,
    #[serde(default)]
    pub selfsim: SelfSimSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub replicas: Option<u64>,
    pub t_end: Option<f64>,
    pub rates: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> CliResult<Self> {
        serde_json::from_str(s).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Reads a config document, or the `config` member of a run manifest so
    /// that a finished run can be repeated from its manifest.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = read(path)?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let is_manifest = value.get("manifest_format").is_some();
        let doc = if is_manifest { value["config"].clone() } else { value };
        let mut config: Self =
            serde_json::from_value(doc).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        if let RatesSource::Path(p) = &config.rates {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new(""));
                config.rates = RatesSource::Path(base.join(p));
            }
        }
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(r) = o.replicas {
            self.replicas = r;
        }
        if let Some(t) = o.t_end {
            self.t_end = t;
        }
        if let Some(p) = &o.rates {
            self.rates = RatesSource::Path(p.clone());
        }
    }

    /// Loads a referenced rate file so the config is self-contained.
    pub fn resolve_rates(&mut self) -> CliResult<()> {
        if let RatesSource::Path(p) = &self.rates {
            let table = RateTable::from_json_str(&read(p)?)
                .map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            self.rates = RatesSource::Inline(table);
        }
        Ok(())
    }

    /// The rate table; [`resolve_rates`](Self::resolve_rates) must have run.
    pub fn rate_table(&self) -> RateTable {
        match &self.rates {
            RatesSource::Inline(t) => *t,
            RatesSource::Path(_) => panic!("rate table not resolved"),
        }
    }

    pub fn sample_times(&self) -> Vec<f64> {
        if self.samples.is_empty() {
            vec![self.t_end]
        } else {
            self.samples.clone()
        }
    }

    pub fn lattice(&self) -> CliResult<(usize, u64)> {
        if let Some(init) = &self.init {
            return Ok((init.n(), init.total()));
        }
        match (self.n, self.k) {
            (Some(0), Some(_)) => Err(config_err("`n` must be at least 1")),
            (Some(n), Some(k)) => Ok((n, k)),
            _ => Err(config_err("the lattice needs `n` and `k` (or `init`)")),
        }
    }

    /// `init`, or the configuration with heights `K / n` and the remainder
    /// spread over the first sites.
    pub fn initial_config(&self) -> CliResult<HeightConfig> {
        if let Some(init) = &self.init {
            return Ok(init.clone());
        }
        let (n, k) = self.lattice()?;
        let base = (k / n as u64) as u32;
        let extra = (k % n as u64) as usize;
        let heights = (0..n).map(|i| base + u32::from(i < extra)).collect();
        HeightConfig::new(heights).map_err(CliError::from)
    }

    /// Checks the invariants every engine relies on.
    pub fn validate(&self, engine: Engine) -> CliResult<()> {
        if let Some(e) = self.engine {
            if e != engine {
                return Err(config_err(format!("config is for `{e}` but `{engine}` was requested")));
            }
        }
        if let (Some(init), Some(n)) = (&self.init, self.n) {
            if init.n() != n {
                return Err(config_err(format!("init has {} sites but n = {n}", init.n())));
            }
        }
        if let (Some(init), Some(k)) = (&self.init, self.k) {
            if init.total() != k {
                return Err(config_err(format!("init holds {} particles but k = {k}", init.total())));
            }
        }
        if self.n == Some(0) {
            return Err(config_err("n must be positive"));
        }
        if self.k == Some(0) {
            return Err(config_err("k must be positive"));
        }
        if self.replicas == 0 {
            return Err(config_err("replicas must be positive"));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(config_err(format!("t_end = {} must be finite and nonnegative", self.t_end)));
        }
        let samples = self.sample_times();
        if samples.iter().any(|s| !(0.0..=self.t_end).contains(s)) {
            return Err(config_err(format!("sample times must lie in [0, {}]", self.t_end)));
        }
        if samples.windows(2).any(|w| w[0] > w[1]) {
            return Err(config_err("sample times must be sorted"));
        }
        if let RatesSource::Path(p) = &self.rates {
            if !p.exists() {
                return Err(config_err(format!("rate file {} does not exist", p.display())));
            }
        }
        if let RatesSource::Inline(t) = &self.rates {
            t.validate()?;
        }
        let t = &self.tolerances;
        if [t.tv, t.sigmas, t.identity].iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(config_err("tolerances must be finite and nonnegative"));
        }
        if [self.mean_field.rtol, self.mean_field.atol].iter().flatten().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(config_err("mean_field tolerances must be finite and nonnegative"));
        }
        if self.mean_field.k_max < 4 {
            return Err(config_err("mean_field.k_max must be at least 4"));
        }
        let ss = &self.selfsim;
        if !(ss.epsilon > 0.0 && ss.epsilon.is_finite()) {
            return Err(config_err("selfsim.epsilon must be positive"));
        }
        if ss.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(config_err("selfsim.times must be positive"));
        }
        if matches!(engine, Engine::Enumerate | Engine::Exact | Engine::Kmc | Engine::Compare) {
            self.lattice()?;
        }
        Ok(())
    }
}
