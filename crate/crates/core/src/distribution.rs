use serde::{Deserialize, Serialize};

/// One-site height law `P_k`, `k = 0..len`, at a given time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightDistribution {
    pub probabilities: Vec<f64>,
    pub time: f64,
}

impl HeightDistribution {
    pub fn new(probabilities: Vec<f64>, time: f64) -> Self {
        Self { probabilities, time }
    }

    /// Point mass at height `k` on the support `0..=k_max`.
    pub fn point_mass(k: usize, k_max: usize) -> Self {
        let mut probabilities = vec![0.0; k_max.max(k) + 1];
        probabilities[k] = 1.0;
        Self { probabilities, time: 0.0 }
    }

    /// Geometric law `(1 - lambda) lambda^k` truncated to `0..=k_max` (not renormalized).
    pub fn geometric(lambda: f64, k_max: usize) -> Self {
        let mut probabilities = Vec::with_capacity(k_max + 1);
        let mut p = 1.0 - lambda;
        for _ in 0..=k_max {
            probabilities.push(p);
            p *= lambda;
        }
        Self { probabilities, time: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.probabilities.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.probabilities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        let total = self.total();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum::<f64>()
            / total
    }

    pub fn variance(&self) -> f64 {
        let total = self.total();
        let mean = self.mean();
        self.probabilities
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mean).powi(2) * p)
            .sum::<f64>()
            / total
    }

    /// Extends the support with zeros up to `len` entries.
    pub fn padded(&self, len: usize) -> Self {
        let mut probabilities = self.probabilities.clone();
        if probabilities.len() < len {
            probabilities.resize(len, 0.0);
        }
        Self { probabilities, time: self.time }
    }

    /// Half the L1 distance, padding the shorter support with zeros.
    pub fn total_variation(&self, other: &Self) -> f64 {
        let len = self.len().max(other.len());
        0.5 * (0..len).map(|k| (self.get(k) - other.get(k)).abs()).sum::<f64>()
    }
}
