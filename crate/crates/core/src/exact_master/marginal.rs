use serde::{Deserialize, Serialize};

use super::evolve::StateDistribution;
use super::generator::build_generator;
use crate::distribution::HeightDistribution;
use crate::error::{Error, Result};
use crate::lattice::{list_moves, RateTable, StateSpace};

fn check(space: &StateSpace, dist: &StateDistribution, site: usize) -> Result<()> {
    if dist.probabilities.len() != space.len() {
        return Err(Error::Dimension { expected: space.len(), got: dist.probabilities.len() });
    }
    if site >= space.n() {
        return Err(Error::SiteOutOfRange { site, n: space.n() });
    }
    Ok(())
}

fn marginalize(space: &StateSpace, values: &[f64], site: usize) -> Vec<f64> {
    let mut out = vec![0.0; space.max_height() as usize + 1];
    for (v, c) in values.iter().zip(space.configs()) {
        out[c.height(site) as usize] += v;
    }
    out
}

/// Law of `heights[site]` on `0..=max height in the space`.
pub fn one_site_marginal(
    space: &StateSpace,
    dist: &StateDistribution,
    site: usize,
) -> Result<HeightDistribution> {
    check(space, dist, site)?;
    Ok(HeightDistribution::new(marginalize(space, &dist.probabilities, site), dist.time))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    /// `d/dt P(heights[site] = k)` from the full generator.
    pub exact: Vec<f64>,
    /// Twice the flux through the bonds `(site, site+2)` and `(site, site+1)`.
    pub two_bond: Vec<f64>,
    /// `max_k |exact - two_bond|`.
    pub residual: f64,
}

/// Compares the exact marginal derivative at `site` with the doubled
/// right-bond flux expression, both evaluated on the exact joint law.
///
/// Doubling stands in for the left bonds, so the two agree when the rates are
/// mirror-symmetric and the law is reflection-symmetric about `site` (e.g.
/// anything evolved from the flat or the uniform start). Otherwise the
/// residual measures the asymmetry.
pub fn marginal_rate_identity(
    space: &StateSpace,
    dist: &StateDistribution,
    rates: &RateTable,
    site: usize,
) -> Result<IdentityReport> {
    check(space, dist, site)?;
    let gen = build_generator(space, rates)?;
    let mut dp = vec![0.0; space.len()];
    gen.apply_forward(&dist.probabilities, &mut dp);
    let exact = marginalize(space, &dp, site);

    let n = space.n();
    let plus = |d: usize| (site + d) % n;
    let mut two_bond = vec![0.0; exact.len()];
    for (p, config) in dist.probabilities.iter().zip(space.configs()) {
        if *p == 0.0 {
            continue;
        }
        for mv in list_moves(config, rates) {
            let on_bond = (mv.source == site && (mv.offset == 2 || mv.offset == 1))
                || (mv.source == plus(2) && mv.offset == -2)
                || (mv.source == plus(1) && mv.offset == -1);
            if !on_bond {
                continue;
            }
            let before = config.height(site) as usize;
            let after = if mv.source == site { before - 1 } else { before + 1 };
            let flux = 2.0 * p * mv.rate;
            two_bond[before] -= flux;
            two_bond[after] += flux;
        }
    }
    let residual = exact
        .iter()
        .zip(&two_bond)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(IdentityReport { exact, two_bond, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_configs, HeightConfig};

    #[test]
    fn point_mass_marginal() {
        let space = enumerate_configs(4, 4).unwrap();
        let d = StateDistribution::point(&space, &HeightConfig::flat(4, 1)).unwrap();
        let m = one_site_marginal(&space, &d, 2).unwrap();
        assert_eq!(m.get(1), 1.0);
        assert_eq!(m.total(), 1.0);
    }

    #[test]
    fn uniform_marginal_is_height_histogram() {
        let space = enumerate_configs(4, 4).unwrap();
        let d = StateDistribution::uniform(&space);
        let m = one_site_marginal(&space, &d, 0).unwrap();
        let mut counts = vec![0usize; m.len()];
        for c in space.configs() {
            counts[c.height(0) as usize] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            assert!((m.get(k) - c as f64 / space.len() as f64).abs() < 1e-15);
        }
        let m3 = one_site_marginal(&space, &d, 3).unwrap();
        assert!(m.total_variation(&m3) < 1e-15);
    }

    #[test]
    fn site_out_of_range() {
        let space = enumerate_configs(4, 4).unwrap();
        let d = StateDistribution::uniform(&space);
        assert!(matches!(one_site_marginal(&space, &d, 4), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn trivial_identity_cases() {
        let space = enumerate_configs(2, 2).unwrap();
        let d = StateDistribution::uniform(&space);
        assert_eq!(marginal_rate_identity(&space, &d, &RateTable::unit(), 0).unwrap().residual, 0.0);
        let space = enumerate_configs(6, 6).unwrap();
        let d = StateDistribution::uniform(&space);
        assert_eq!(marginal_rate_identity(&space, &d, &RateTable::zero(), 0).unwrap().residual, 0.0);
    }
}
