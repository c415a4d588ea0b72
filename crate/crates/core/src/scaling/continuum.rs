use serde::{Deserialize, Serialize};

use crate::distribution::HeightDistribution;
use crate::error::{Error, Result};
use crate::mean_field::{mf_rhs, MeanFieldParams, MONOMIALS};

/// Leading-order coefficient of `d^2(P^5)/dl^2` in the long-wavelength
/// expansion of the bulk term `2 Lap F_k`.
///
/// Every monomial of `F_k` has total degree five, so to leading order each
/// contributes its weight times `P^5`; the Laplacian contributes `eps^2 d^2/dl^2`.
pub fn continuum_coefficient_a(params: &MeanFieldParams) -> f64 {
    debug_assert!(MONOMIALS.iter().all(|(a, b, c)| a + b + c == 5));
    2.0 * (params.c.iter().sum::<f64>() - params.d.iter().sum::<f64>())
}

/// Coefficient `B` of the first correction `eps B d^3(P^5)/dl^3` to the
/// continuum limit: `2 sum_j w_j (e_next - e_prev) / 5`.
pub fn continuum_drift(params: &MeanFieldParams) -> f64 {
    let weights = params.weights();
    2.0 * MONOMIALS
        .iter()
        .zip(weights)
        .map(|(&(prev, _, next), w)| w * f64::from(next - prev))
        .sum::<f64>()
        / 5.0
}

/// Smooth test profile `amplitude * exp(-(l - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBump {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Default for GaussianBump {
    fn default() -> Self {
        Self { amplitude: 0.5, center: 3.0, width: 0.6 }
    }
}

impl GaussianBump {
    pub fn value(&self, l: f64) -> f64 {
        let z = (l - self.center) / self.width;
        self.amplitude * (-0.5 * z * z).exp()
    }

    fn d1(&self, l: f64) -> f64 {
        -(l - self.center) / (self.width * self.width) * self.value(l)
    }

    fn d2(&self, l: f64) -> f64 {
        let w2 = self.width * self.width;
        ((l - self.center).powi(2) / (w2 * w2) - 1.0 / w2) * self.value(l)
    }

    /// `d^2(P^5)/dl^2 = 5 P^4 P'' + 20 P^3 P'^2`.
    pub fn fifth_power_curvature(&self, l: f64) -> f64 {
        let p = self.value(l);
        5.0 * p.powi(4) * self.d2(l) + 20.0 * p.powi(3) * self.d1(l).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub a: f64,
    pub drift: f64,
    pub epsilons: Vec<f64>,
    /// `max_l |rhs/eps^2 - A d^2(P^5)| / max_l |A d^2(P^5)|` per epsilon.
    pub errors: Vec<f64>,
    /// `log2(e_i / e_{i+1})` for consecutive halvings.
    pub orders: Vec<f64>,
    /// `rhs_k / (eps^2 A d^2(P^5))` at each probe point, per epsilon.
    pub ratios: Vec<Vec<f64>>,
}

/// Samples `bump` on the lattice `l = eps k`, evaluates the mean-field
/// right-hand side and compares it with `eps^2 A d^2(P^5)` at the probe
/// points `ls` for every `eps`.
pub fn epsilon_refinement(
    params: &MeanFieldParams,
    bump: &GaussianBump,
    epsilons: &[f64],
    ls: &[f64],
) -> Result<Refinement> {
    let a = continuum_coefficient_a(params);
    if a == 0.0 {
        return Err(Error::Domain("A = 0: nothing to refine against".into()));
    }
    let reach = bump.center + 12.0 * bump.width;
    let mut errors = Vec::with_capacity(epsilons.len());
    let mut ratios = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let k_max = (reach / eps).ceil() as usize;
        let lattice = MeanFieldParams { k_max, ..*params };
        let p = HeightDistribution::new((0..=k_max).map(|k| bump.value(eps * k as f64)).collect(), 0.0);
        let rhs = mf_rhs(&p, &lattice)?;
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        let mut row = Vec::with_capacity(ls.len());
        for &l in ls {
            let k = (l / eps).round() as usize;
            if k < 2 || k + 2 > k_max {
                return Err(Error::Domain(format!("probe l = {l} is too close to the lattice edge")));
            }
            let predicted = a * bump.fifth_power_curvature(eps * k as f64);
            worst = worst.max((rhs[k] / (eps * eps) - predicted).abs());
            scale = scale.max(predicted.abs());
            row.push(rhs[k] / (eps * eps * predicted));
        }
        errors.push(worst / scale);
        ratios.push(row);
    }
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(Refinement { a, drift: continuum_drift(params), epsilons: epsilons.to_vec(), errors, orders, ratios })
}
