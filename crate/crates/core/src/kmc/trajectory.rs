use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use super::sumtree::SumTree;
use crate::error::{Error, Result};
use crate::lattice::{site_moves, HeightConfig, MoveEvent, RateTable};

/// Sites whose outgoing moves depend on a column are within this distance of it.
const INFLUENCE: isize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmcStep {
    pub mv: MoveEvent,
    pub waiting_time: f64,
}

/// One CTMC trajectory: configuration, clock, RNG and the per-site rate cache.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    heights: Vec<u32>,
    clock: f64,
    rng: ChaCha8Rng,
    rates: RateTable,
    site_rates: SumTree,
    particles: u64,
    events: u64,
}

fn site_total(heights: &[u32], site: usize, rates: &RateTable) -> f64 {
    let mut moves: SmallVec<[MoveEvent; 4]> = SmallVec::new();
    site_moves(heights, site, rates, &mut moves);
    moves.iter().map(|m| m.rate).sum()
}

impl TrajectoryState {
    pub fn new(init: &HeightConfig, rates: &RateTable, seed: u64) -> Result<Self> {
        rates.validate()?;
        let heights = init.heights().to_vec();
        let totals: Vec<f64> = (0..heights.len()).map(|i| site_total(&heights, i, rates)).collect();
        Ok(Self {
            particles: init.total(),
            heights,
            clock: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            rates: *rates,
            site_rates: SumTree::new(&totals),
            events: 0,
        })
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    pub fn config(&self) -> HeightConfig {
        HeightConfig::from_vec_unchecked(self.heights.clone())
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn rates(&self) -> &RateTable {
        &self.rates
    }

    pub fn total_rate(&self) -> f64 {
        self.site_rates.total()
    }

    /// Samples the waiting time and the next move without applying it.
    /// `None` when no move has positive rate.
    pub fn draw_event(&mut self) -> Option<KmcStep> {
        let total = self.site_rates.total();
        if total <= 0.0 {
            return None;
        }
        // 1 - U lies in (0, 1]
        let u: f64 = self.rng.random();
        let waiting_time = -(1.0 - u).ln() / total;

        let pick = self.rng.random::<f64>() * total;
        let site = self.site_rates.find(pick);
        let mut moves: SmallVec<[MoveEvent; 4]> = SmallVec::new();
        site_moves(&self.heights, site, &self.rates, &mut moves);
        let site_sum: f64 = moves.iter().map(|m| m.rate).sum();
        let mut within = self.rng.random::<f64>() * site_sum;
        let mut chosen = *moves.last().expect("selected site has a move");
        for m in &moves {
            if within < m.rate {
                chosen = *m;
                break;
            }
            within -= m.rate;
        }
        Some(KmcStep { mv: chosen, waiting_time })
    }

    /// Applies a move drawn by [`draw_event`](Self::draw_event) and advances the clock.
    pub fn apply(&mut self, step: &KmcStep) {
        let KmcStep { mv, waiting_time } = *step;
        self.heights[mv.source] -= 1;
        self.heights[mv.target] += 1;
        self.clock += waiting_time;
        self.events += 1;
        debug_assert!(crate::lattice::is_restricted_u32(&self.heights));
        debug_assert_eq!(self.heights.iter().map(|&h| u64::from(h)).sum::<u64>(), self.particles);

        let n = self.heights.len();
        let mut touched: SmallVec<[usize; 32]> = SmallVec::new();
        if n as isize <= 2 * INFLUENCE + 1 {
            touched.extend(0..n);
        } else {
            for c in [mv.source, mv.target] {
                for d in -INFLUENCE..=INFLUENCE {
                    touched.push((c as isize + d).rem_euclid(n as isize) as usize);
                }
            }
            touched.sort_unstable();
            touched.dedup();
        }
        for site in touched {
            let r = site_total(&self.heights, site, &self.rates);
            self.site_rates.set(site, r);
        }
    }

    /// Site rates recomputed from scratch; used to audit the cache.
    pub fn recomputed_site_rates(&self) -> Vec<f64> {
        (0..self.heights.len()).map(|i| site_total(&self.heights, i, &self.rates)).collect()
    }

    pub fn cached_site_rates(&self) -> Vec<f64> {
        (0..self.heights.len()).map(|i| self.site_rates.get(i)).collect()
    }
}

/// One Gillespie event; [`Error::Absorbing`] when the catalog is empty.
pub fn kmc_step(state: &mut TrajectoryState) -> Result<KmcStep> {
    let step = state.draw_event().ok_or(Error::Absorbing(state.clock))?;
    state.apply(&step);
    Ok(step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::list_moves;

    #[test]
    fn frozen_two_site_ring_is_absorbing() {
        let init: HeightConfig = "(1,1)".parse().unwrap();
        let mut s = TrajectoryState::new(&init, &RateTable::unit(), 1).unwrap();
        assert!(matches!(kmc_step(&mut s), Err(Error::Absorbing(_))));
    }

    #[test]
    fn replay_is_identical() {
        let init = HeightConfig::flat(32, 2);
        let run = |seed| {
            let mut s = TrajectoryState::new(&init, &RateTable::unit(), seed).unwrap();
            (0..500).map(|_| kmc_step(&mut s).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }

    #[test]
    fn cache_matches_full_recompute() {
        let rates = RateTable::from_coefficients([1.0, 0.3, 2.0, 0.7], [0.2, 1.1, 0.4, 0.9], 0.6, 1.3);
        for n in [5, 9, 10, 40] {
            let mut s = TrajectoryState::new(&HeightConfig::flat(n, 3), &rates, n as u64).unwrap();
            for _ in 0..2000 {
                kmc_step(&mut s).unwrap();
                let config = s.config();
                let catalog: f64 = list_moves(&config, &rates).iter().map(|m| m.rate).sum();
                assert!((s.total_rate() - catalog).abs() < 1e-9);
            }
            assert_eq!(s.cached_site_rates(), s.recomputed_site_rates());
        }
    }
}
