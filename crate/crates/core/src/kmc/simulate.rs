use serde::{Deserialize, Serialize};

use super::trajectory::TrajectoryState;
use crate::error::{Error, Result};
use crate::lattice::{HeightConfig, RateTable};

/// Surface observables of one trajectory at the requested sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub sample_times: Vec<f64>,
    pub mean_height: Vec<f64>,
    /// Spatial variance of the heights.
    pub width_sq: Vec<f64>,
    /// Fraction of sites at height `k`, per sample.
    pub one_site_hist: Vec<Vec<f64>>,
    pub replica_seed: u64,
    /// Time at which the trajectory froze, if it did; later samples repeat
    /// the frozen configuration.
    pub absorbed_at: Option<f64>,
    pub events: u64,
}

impl ObservableSeries {
    fn record(&mut self, t: f64, heights: &[u32]) {
        let n = heights.len() as f64;
        let mean = heights.iter().map(|&h| f64::from(h)).sum::<f64>() / n;
        let var = heights.iter().map(|&h| (f64::from(h) - mean).powi(2)).sum::<f64>() / n;
        let max = heights.iter().copied().max().unwrap_or(0) as usize;
        let mut hist = vec![0.0; max + 1];
        for &h in heights {
            hist[h as usize] += 1.0;
        }
        for x in &mut hist {
            *x /= n;
        }
        self.sample_times.push(t);
        self.mean_height.push(mean);
        self.width_sq.push(var);
        self.one_site_hist.push(hist);
    }
}

pub(crate) fn validate_samples(t_end: f64, samples: &[f64]) -> Result<()> {
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Domain(format!("t_end = {t_end} must be finite and nonnegative")));
    }
    if samples.iter().any(|&s| !(0.0..=t_end).contains(&s)) {
        return Err(Error::Domain(format!("sample times must lie in [0, {t_end}]")));
    }
    if samples.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("sample times must be sorted".into()));
    }
    Ok(())
}

/// Runs one trajectory from `init` to `t_end`, recording the configuration
/// in force at each sample time.
pub fn simulate(
    init: &HeightConfig,
    rates: &RateTable,
    t_end: f64,
    samples: &[f64],
    seed: u64,
) -> Result<ObservableSeries> {
    validate_samples(t_end, samples)?;
    let mut state = TrajectoryState::new(init, rates, seed)?;
    let mut series = ObservableSeries {
        sample_times: Vec::with_capacity(samples.len()),
        mean_height: Vec::with_capacity(samples.len()),
        width_sq: Vec::with_capacity(samples.len()),
        one_site_hist: Vec::with_capacity(samples.len()),
        replica_seed: seed,
        absorbed_at: None,
        events: 0,
    };
    let mut next = 0;
    loop {
        let Some(step) = state.draw_event() else {
            series.absorbed_at = Some(state.clock());
            break;
        };
        let event_time = state.clock() + step.waiting_time;
        while next < samples.len() && samples[next] < event_time {
            series.record(samples[next], state.heights());
            next += 1;
        }
        if event_time > t_end {
            break;
        }
        state.apply(&step);
    }
    while next < samples.len() {
        series.record(samples[next], state.heights());
        next += 1;
    }
    series.events = state.events();
    Ok(series)
}
