use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::seed::replica_seed;
use super::simulate::{simulate, validate_samples, ObservableSeries};
use crate::distribution::HeightDistribution;
use crate::error::Result;
use crate::lattice::{HeightConfig, RateTable};

/// Replicas per work unit. Fixed so the summation order, and hence every
/// output bit, does not depend on the thread count.
const CHUNK: u64 = 256;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, other: &Moments) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn estimate(&self, count: u64) -> Estimate {
        let n = count as f64;
        let mean = self.sum / n;
        let se = if count > 1 {
            let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Estimate { mean, se }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean over replicas.
    pub se: f64,
}

/// Mergeable accumulation of replica observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    sample_times: Vec<f64>,
    replicas: u64,
    absorbed: u64,
    events: u64,
    mean_height: Vec<Moments>,
    width_sq: Vec<Moments>,
    hist: Vec<Vec<Moments>>,
}

impl Ensemble {
    pub fn empty(sample_times: &[f64]) -> Self {
        let m = sample_times.len();
        Self {
            sample_times: sample_times.to_vec(),
            replicas: 0,
            absorbed: 0,
            events: 0,
            mean_height: vec![Moments::default(); m],
            width_sq: vec![Moments::default(); m],
            hist: vec![Vec::new(); m],
        }
    }

    pub fn replicas(&self) -> u64 {
        self.replicas
    }

    pub fn absorbed(&self) -> u64 {
        self.absorbed
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn sample_times(&self) -> &[f64] {
        &self.sample_times
    }

    pub fn push(&mut self, series: &ObservableSeries) {
        assert_eq!(series.sample_times, self.sample_times, "sample grids differ");
        self.replicas += 1;
        self.absorbed += u64::from(series.absorbed_at.is_some());
        self.events += series.events;
        for (i, hist) in series.one_site_hist.iter().enumerate() {
            self.mean_height[i].push(series.mean_height[i]);
            self.width_sq[i].push(series.width_sq[i]);
            let acc = &mut self.hist[i];
            if acc.len() < hist.len() {
                acc.resize(hist.len(), Moments::default());
            }
            // bins beyond this replica's support contribute exact zeros
            for (m, &x) in acc.iter_mut().zip(hist) {
                m.push(x);
            }
        }
    }

    /// Adds another ensemble over the same sample grid.
    pub fn merge(&mut self, other: &Ensemble) {
        assert_eq!(self.sample_times, other.sample_times, "sample grids differ");
        self.replicas += other.replicas;
        self.absorbed += other.absorbed;
        self.events += other.events;
        for i in 0..self.sample_times.len() {
            self.mean_height[i].merge(&other.mean_height[i]);
            self.width_sq[i].merge(&other.width_sq[i]);
            let acc = &mut self.hist[i];
            if acc.len() < other.hist[i].len() {
                acc.resize(other.hist[i].len(), Moments::default());
            }
            for (m, o) in acc.iter_mut().zip(&other.hist[i]) {
                m.merge(o);
            }
        }
    }

    pub fn summary(&self) -> EnsembleSummary {
        let est = |v: &[Moments]| v.iter().map(|m| m.estimate(self.replicas)).collect::<Vec<_>>();
        EnsembleSummary {
            sample_times: self.sample_times.clone(),
            replicas: self.replicas,
            absorbed: self.absorbed,
            mean_height: est(&self.mean_height),
            width_sq: est(&self.width_sq),
            one_site_hist: self.hist.iter().map(|h| est(h)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub sample_times: Vec<f64>,
    pub replicas: u64,
    pub absorbed: u64,
    pub mean_height: Vec<Estimate>,
    pub width_sq: Vec<Estimate>,
    pub one_site_hist: Vec<Vec<Estimate>>,
}

impl EnsembleSummary {
    /// Averaged one-site histogram at sample `i`.
    pub fn histogram(&self, i: usize) -> HeightDistribution {
        HeightDistribution::new(
            self.one_site_hist[i].iter().map(|e| e.mean).collect(),
            self.sample_times[i],
        )
    }

    /// `0.5 * sum_k se_k`, the statistical scale of a total-variation distance.
    pub fn tv_error_scale(&self, i: usize) -> f64 {
        0.5 * self.one_site_hist[i].iter().map(|e| e.se).sum::<f64>()
    }
}

/// Replicas `first..first + count` under `base_seed`, accumulated in chunks
/// that run in parallel and are merged in index order.
pub fn ensemble_range(
    init: &HeightConfig,
    rates: &RateTable,
    t_end: f64,
    samples: &[f64],
    first: u64,
    count: u64,
    base_seed: u64,
) -> Result<Ensemble> {
    validate_samples(t_end, samples)?;
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Ensemble> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Ensemble> {
            let mut acc = Ensemble::empty(samples);
            let lo = first + c * CHUNK;
            let hi = (lo + CHUNK).min(first + count);
            for r in lo..hi {
                acc.push(&simulate(init, rates, t_end, samples, replica_seed(base_seed, r))?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = Ensemble::empty(samples);
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

pub fn ensemble(
    init: &HeightConfig,
    rates: &RateTable,
    t_end: f64,
    samples: &[f64],
    replicas: u64,
    base_seed: u64,
) -> Result<Ensemble> {
    ensemble_range(init, rates, t_end, samples, 0, replicas, base_seed)
}
