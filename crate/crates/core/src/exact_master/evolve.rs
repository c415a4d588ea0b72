use serde::{Deserialize, Serialize};

use super::generator::GeneratorMatrix;
use crate::error::{Error, Result};
use crate::lattice::{HeightConfig, StateSpace};
use crate::ode::DormandPrince;

/// Probability vector aligned with a [`StateSpace`] ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDistribution {
    pub probabilities: Vec<f64>,
    pub time: f64,
}

impl StateDistribution {
    /// `P_h(0) = delta(h0, h)`.
    pub fn point(space: &StateSpace, config: &HeightConfig) -> Result<Self> {
        let i = space.index_of(config).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "{config} is not in the space of n={}, K={}",
                space.n(),
                space.particles()
            ))
        })?;
        let mut probabilities = vec![0.0; space.len()];
        probabilities[i] = 1.0;
        Ok(Self { probabilities, time: 0.0 })
    }

    pub fn uniform(space: &StateSpace) -> Self {
        let p = 1.0 / space.len() as f64;
        Self { probabilities: vec![p; space.len()], time: 0.0 }
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.probabilities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `E[sum_i h_i]`.
    pub fn expected_particles(&self, space: &StateSpace) -> f64 {
        self.probabilities
            .iter()
            .zip(space.configs())
            .map(|(p, c)| p * c.total() as f64)
            .sum()
    }

    fn check_against(&self, gen: &GeneratorMatrix) -> Result<()> {
        if self.probabilities.len() != gen.dimension() {
            return Err(Error::Dimension { expected: gen.dimension(), got: self.probabilities.len() });
        }
        Ok(())
    }
}

/// Forward equation `dP/dt = P a` at `init.time + t`, integrated with
/// relative tolerance 1e-8 and absolute tolerance 1e-10.
pub fn evolve_forward(gen: &GeneratorMatrix, init: &StateDistribution, t: f64) -> Result<StateDistribution> {
    evolve_forward_with(gen, init, t, &DormandPrince::default())
}

pub fn evolve_forward_with(
    gen: &GeneratorMatrix,
    init: &StateDistribution,
    t: f64,
    integrator: &DormandPrince,
) -> Result<StateDistribution> {
    Ok(evolve_times(gen, init, &[t], integrator)?.pop().expect("one output"))
}

/// Distributions at each elapsed time in `times` (sorted, nonnegative).
pub fn evolve_times(
    gen: &GeneratorMatrix,
    init: &StateDistribution,
    times: &[f64],
    integrator: &DormandPrince,
) -> Result<Vec<StateDistribution>> {
    init.check_against(gen)?;
    if let Some(&bad) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Domain(format!("evolution time {bad} must be finite and nonnegative")));
    }
    let (states, _) = integrator.integrate(
        |_, p, dp| gen.apply_forward(p, dp),
        0.0,
        &init.probabilities,
        times,
        |_, _| Ok(()),
    )?;
    Ok(states
        .into_iter()
        .zip(times)
        .map(|(probabilities, &t)| StateDistribution { probabilities, time: init.time + t })
        .collect())
}

/// Transient solution by uniformization:
/// `P(t) = sum_m Poisson(m; Lt) P(0) U^m` with `U = I + a / L`.
///
/// Poisson weights are accumulated in log space; the series stops once the
/// remaining tail mass is below `tail`.
pub fn uniformization(
    gen: &GeneratorMatrix,
    init: &StateDistribution,
    t: f64,
    tail: f64,
) -> Result<StateDistribution> {
    init.check_against(gen)?;
    let lambda = gen.max_exit_rate() * 1.02;
    if t == 0.0 || lambda == 0.0 {
        return Ok(StateDistribution { probabilities: init.probabilities.clone(), time: init.time + t });
    }
    let mu = lambda * t;
    let dim = gen.dimension();
    let mut term = init.probabilities.clone();
    let mut next = vec![0.0; dim];
    let mut result = vec![0.0; dim];
    let mut accumulated = 0.0;
    let mut log_w = -mu;
    let mut m: u64 = 0;
    loop {
        let w = log_w.exp();
        for (r, x) in result.iter_mut().zip(&term) {
            *r += w * x;
        }
        accumulated += w;
        if (m as f64) > mu && 1.0 - accumulated < tail {
            break;
        }
        if m > 10 * (mu as u64) + 1000 {
            return Err(Error::Integration { t, reason: "uniformization series did not converge".into() });
        }
        // term <- term U
        gen.apply_forward(&term, &mut next);
        for (x, a) in term.iter_mut().zip(&next) {
            *x += a / lambda;
        }
        m += 1;
        log_w += mu.ln() - (m as f64).ln();
    }
    Ok(StateDistribution { probabilities: result, time: init.time + t })
}
