use std::collections::HashMap;

use super::config::HeightConfig;
use crate::error::{Error, Result};

/// Environment variable overriding [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "CRSOS_STATE_CAP";
pub const DEFAULT_STATE_CAP: u128 = 2_000_000;

pub fn state_cap() -> u128 {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

/// `|Omega_{n,K}|` by a transfer count over (current height, running sum) for
/// each choice of the first height.
pub fn count_configs(n: usize, k: u64) -> u128 {
    if n == 0 {
        return 0;
    }
    let k = k as usize;
    let mut total: u128 = 0;
    for first in 0..=k {
        // dp[h][s]
        let mut dp = vec![vec![0u128; k + 1]; k + 1];
        dp[first][first] = 1;
        for _ in 1..n {
            let mut next = vec![vec![0u128; k + 1]; k + 1];
            for h in 0..=k {
                for s in 0..=k {
                    let c = dp[h][s];
                    if c == 0 {
                        continue;
                    }
                    for h2 in h.saturating_sub(1)..=(h + 1).min(k) {
                        if s + h2 <= k {
                            next[h2][s + h2] = next[h2][s + h2].saturating_add(c);
                        }
                    }
                }
            }
            dp = next;
        }
        for h in first.saturating_sub(1)..=(first + 1).min(k) {
            total = total.saturating_add(dp[h][k]);
        }
    }
    total
}

/// All restricted configurations with `n` sites and `K` particles, in
/// lexicographic order, with a reverse index.
#[derive(Debug, Clone)]
pub struct StateSpace {
    n: usize,
    k: u64,
    configs: Vec<HeightConfig>,
    index: HashMap<HeightConfig, usize>,
}

impl StateSpace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn particles(&self) -> u64 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[HeightConfig] {
        &self.configs
    }

    pub fn config(&self, i: usize) -> &HeightConfig {
        &self.configs[i]
    }

    pub fn index_of(&self, config: &HeightConfig) -> Option<usize> {
        self.index.get(config).copied()
    }

    /// Largest height any member can take.
    pub fn max_height(&self) -> u32 {
        self.configs
            .iter()
            .flat_map(|c| c.heights().iter().copied())
            .max()
            .unwrap_or(0)
    }
}

pub fn enumerate_configs(n: usize, k: u64) -> Result<StateSpace> {
    enumerate_configs_with_cap(n, k, state_cap())
}

pub fn enumerate_configs_with_cap(n: usize, k: u64, cap: u128) -> Result<StateSpace> {
    if n == 0 {
        return Err(Error::InvalidConfig("a lattice needs at least one site".into()));
    }
    let count = count_configs(n, k);
    if count > cap {
        return Err(Error::ResourceCap { n, k, count, cap });
    }
    let mut configs = Vec::with_capacity(count as usize);
    let mut prefix = Vec::with_capacity(n);
    extend(&mut prefix, n, k, &mut configs);
    debug_assert_eq!(configs.len() as u128, count);
    let index = configs.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    Ok(StateSpace { n, k, configs, index })
}

fn extend(prefix: &mut Vec<u32>, n: usize, remaining: u64, out: &mut Vec<HeightConfig>) {
    if prefix.len() == n {
        if remaining == 0 && prefix[n - 1].abs_diff(prefix[0]) <= 1 {
            out.push(HeightConfig::from_vec_unchecked(prefix.clone()));
        }
        return;
    }
    let (lo, hi) = match prefix.last() {
        None => (0, remaining),
        Some(&p) => (u64::from(p.saturating_sub(1)), (u64::from(p) + 1).min(remaining)),
    };
    let slots_after = (n - prefix.len() - 1) as u64;
    for h in lo..=hi {
        let rest = remaining - h;
        // the remaining sites can climb by at most one per site
        let max_rest: u64 = (1..=slots_after).map(|j| h + j).sum();
        if rest > max_rest {
            continue;
        }
        prefix.push(h as u32);
        extend(prefix, n, rest, out);
        prefix.pop();
    }
}
