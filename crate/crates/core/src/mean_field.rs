//! Factorized one-site dynamics and its geometric stationary law.
//!
//! With every joint window replaced by a product of one-site laws, only the
//! climb (`c1..c4`) and descend (`d1..d4`) hops survive and
//!
//! ```text
//! dP_k/dt = 2 Lap[ F_k ] + boundary terms at k = 0, 1
//! F_k = c1 P_k^5 + c2 P_k^4 P_{k+1} + c3 P_{k-1} P_k^4 + c4 P_{k-1} P_k^3 P_{k+1}
//!     - d1 P_{k-1} P_k^3 P_{k+1} - d2 P_{k-1} P_k^2 P_{k+1}^2
//!     - d3 P_{k-1}^2 P_k^2 P_{k+1} - d4 P_{k-1}^2 P_k P_{k+1}^2
//! ```
//!
//! with `P_{-1} = P_{k_max+1} = 0`.

use serde::{Deserialize, Serialize};

use crate::distribution::HeightDistribution;
use crate::error::{Error, Result};
use crate::lattice::RateTable;
use crate::ode::DormandPrince;

/// Exponents of `(P_{k-1}, P_k, P_{k+1})` in each monomial of `F_k`, in the
/// order c1..c4, d1..d4.
pub const MONOMIALS: [(i32, i32, i32); 8] = [
    (0, 5, 0),
    (0, 4, 1),
    (1, 4, 0),
    (1, 3, 1),
    (1, 3, 1),
    (1, 2, 2),
    (2, 2, 1),
    (2, 1, 2),
];

/// How the `k = 0, 1` corrections for empty columns are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTerms {
    /// `+4 (c1 P_0^5 + c2 P_0^4 P_1)` at `k = 0` and
    /// `-(c1 P_1^5 + c2 P_1^4 P_2)` at `k = 1`.
    #[default]
    AsPrinted,
    /// `+4 F_0` at `k = 0` and `-2 F_0` at `k = 1`: the bookkeeping that
    /// forbids departures from empty columns and conserves total mass.
    Conservative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub c: [f64; 4],
    pub d: [f64; 4],
    pub k_max: usize,
    pub boundary: BoundaryTerms,
    pub rtol: f64,
    pub atol: f64,
}

impl MeanFieldParams {
    pub const DEFAULT_K_MAX: usize = 200;

    pub fn new(c: [f64; 4], d: [f64; 4], k_max: usize) -> Result<Self> {
        let p = Self { c, d, k_max, boundary: BoundaryTerms::AsPrinted, rtol: 1e-8, atol: 1e-12 };
        p.validate()?;
        Ok(p)
    }

    pub fn from_rates(rates: &RateTable, k_max: usize) -> Result<Self> {
        Self::new(rates.climb(), rates.descend(), k_max)
    }

    pub fn with_boundary(mut self, boundary: BoundaryTerms) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 4 {
            return Err(Error::Domain(format!("k_max = {} must be at least 4", self.k_max)));
        }
        if self.c.iter().chain(&self.d).any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Domain("mean-field rates must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Signed weights of [`MONOMIALS`].
    pub fn weights(&self) -> [f64; 8] {
        let [c1, c2, c3, c4] = self.c;
        let [d1, d2, d3, d4] = self.d;
        [c1, c2, c3, c4, -d1, -d2, -d3, -d4]
    }
}

/// `F_k` for one window.
#[inline]
pub fn bracket(prev: f64, p: f64, next: f64, params: &MeanFieldParams) -> f64 {
    let [c1, c2, c3, c4] = params.c;
    let [d1, d2, d3, d4] = params.d;
    let p2 = p * p;
    let p3 = p2 * p;
    let p4 = p3 * p;
    c1 * p4 * p + c2 * p4 * next + c3 * prev * p4 + c4 * prev * p3 * next
        - d1 * prev * p3 * next
        - d2 * prev * p2 * next * next
        - d3 * prev * prev * p2 * next
        - d4 * prev * prev * p * next * next
}

/// `F_k` for `k = 0..=k_max`.
pub fn bracket_values(p: &[f64], params: &MeanFieldParams) -> Vec<f64> {
    let at = |i: isize| if i < 0 { 0.0 } else { p.get(i as usize).copied().unwrap_or(0.0) };
    (0..p.len() as isize).map(|k| bracket(at(k - 1), at(k), at(k + 1), params)).collect()
}

fn rhs_into(p: &[f64], params: &MeanFieldParams, f: &mut Vec<f64>, out: &mut [f64]) {
    let len = p.len();
    f.clear();
    f.extend(bracket_values(p, params));
    let fat = |i: isize| if i < 0 || i as usize >= len { 0.0 } else { f[i as usize] };
    for (k, o) in out.iter_mut().enumerate() {
        let k = k as isize;
        *o = 2.0 * (fat(k - 1) - 2.0 * fat(k) + fat(k + 1));
    }
    let [c1, c2, ..] = params.c;
    let at = |i: usize| p.get(i).copied().unwrap_or(0.0);
    let f0 = c1 * at(0).powi(5) + c2 * at(0).powi(4) * at(1);
    out[0] += 4.0 * f0;
    if len > 1 {
        out[1] -= match params.boundary {
            BoundaryTerms::AsPrinted => c1 * at(1).powi(5) + c2 * at(1).powi(4) * at(2),
            BoundaryTerms::Conservative => 2.0 * f0,
        };
    }
}

/// `dP_k/dt` for `k = 0..=k_max`.
pub fn mf_rhs(p: &HeightDistribution, params: &MeanFieldParams) -> Result<Vec<f64>> {
    if p.len() != params.k_max + 1 {
        return Err(Error::Dimension { expected: params.k_max + 1, got: p.len() });
    }
    let mut f = Vec::with_capacity(p.len());
    let mut out = vec![0.0; p.len()];
    rhs_into(&p.probabilities, params, &mut f, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSample {
    pub distribution: HeightDistribution,
    /// `|sum_k P_k - 1|`.
    pub drift: f64,
    pub min_entry: f64,
}

/// Negative entries below this abort the integration.
pub const NEGATIVITY_ABORT: f64 = -1e-6;

/// Integrates the factorized system from `p0` and returns the law at each
/// sample time (sorted, within `[0, t_end]`).
pub fn mf_evolve(
    p0: &HeightDistribution,
    params: &MeanFieldParams,
    t_end: f64,
    samples: &[f64],
) -> Result<Vec<MeanFieldSample>> {
    params.validate()?;
    if p0.len() != params.k_max + 1 {
        return Err(Error::Dimension { expected: params.k_max + 1, got: p0.len() });
    }
    if !(t_end.is_finite() && t_end >= 0.0)
        || samples.iter().any(|&s| !(0.0..=t_end).contains(&s))
        || samples.windows(2).any(|w| w[0] > w[1])
    {
        return Err(Error::Domain("sample times must be sorted within [0, t_end]".into()));
    }
    let integrator = DormandPrince::with_tolerances(params.rtol, params.atol);
    let mut scratch = Vec::with_capacity(p0.len());
    let (states, _) = integrator.integrate(
        |_, p, dp| rhs_into(p, params, &mut scratch, dp),
        0.0,
        &p0.probabilities,
        samples,
        |t, p| match p.iter().enumerate().find(|(_, &x)| x < NEGATIVITY_ABORT) {
            Some((k, &value)) => Err(Error::Negativity { k, t: p0.time + t, value }),
            None => Ok(()),
        },
    )?;
    Ok(states
        .into_iter()
        .zip(samples)
        .map(|(probabilities, &t)| {
            let distribution = HeightDistribution::new(probabilities, p0.time + t);
            MeanFieldSample {
                drift: (distribution.total() - 1.0).abs(),
                min_entry: distribution.min_entry(),
                distribution,
            }
        })
        .collect())
}

/// Largest change of mean and variance at `t_end` when `k_max` is doubled.
pub fn truncation_discrepancy(p0: &HeightDistribution, params: &MeanFieldParams, t_end: f64) -> Result<f64> {
    let base = mf_evolve(p0, params, t_end, &[t_end])?.pop().expect("one sample");
    let doubled = MeanFieldParams { k_max: 2 * params.k_max, ..*params };
    let wide = mf_evolve(&p0.padded(doubled.k_max + 1), &doubled, t_end, &[t_end])?
        .pop()
        .expect("one sample");
    let (a, b) = (&base.distribution, &wide.distribution);
    Ok((a.mean() - b.mean()).abs().max((a.variance() - b.variance()).abs()))
}

/// Coefficients `(q2, q1, q0)` of `q2 x^2 + q1 x + q0`.
pub type Quadratic = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTriples {
    /// As printed: `(c2 - d2, -(c1 - d1 + c4 - d4), c3 - d3)`.
    pub paper: Quadratic,
    /// Collected from `F_k` on `P_k = (1 - x) x^k`, multiplied through by `x`.
    pub oracle: Quadratic,
}

pub fn stationary_quadratic(params: &MeanFieldParams) -> QuadraticTriples {
    let [c1, c2, c3, c4] = params.c;
    let [d1, d2, d3, d4] = params.d;
    let paper = [c2 - d2, -(c1 - d1 + c4 - d4), c3 - d3];

    // On the geometric law P_{k-1} = base/x, P_{k+1} = base x, so a monomial
    // scales as base^5 x^(e_next - e_prev); collect the powers -1, 0, 1.
    let mut by_power = [0.0; 3];
    for ((e_prev, _, e_next), w) in MONOMIALS.iter().zip(params.weights()) {
        by_power[(e_next - e_prev + 1) as usize] += w;
    }
    let oracle = [by_power[2], by_power[1], by_power[0]];
    QuadraticTriples { paper, oracle }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    None,
    OneRoot,
    TwoRoots,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricStats {
    pub lambda: f64,
    /// `lambda / (1 - lambda)`.
    pub mean_height: f64,
    /// `sqrt(lambda) / (1 - lambda)`, the printed width formula.
    pub width_paper: f64,
    /// `lambda / (1 - lambda)^2`, the variance of the geometric law.
    pub width_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryAnalysis {
    pub quad_coeffs: Quadratic,
    /// Real roots with multiplicity, ascending.
    pub roots: Vec<f64>,
    pub roots_in_unit: Vec<f64>,
    pub phase: Phase,
    /// The root when exactly one lies in (0, 1); no preference otherwise.
    pub lambda: Option<f64>,
    pub stats: Vec<GeometricStats>,
    /// `q0 (q2 + q1 + q0) < 0`.
    pub one_root_condition: bool,
    /// `q0 / q2 < 0` and `(q2 + q1 + q0) / q2 < 0`, as printed.
    pub two_root_condition: bool,
}

/// Real roots of `q2 x^2 + q1 x + q0`, ascending. Uses the sign-aware
/// formulation so neither root suffers cancellation.
pub fn quadratic_roots(q: Quadratic) -> Vec<f64> {
    let [a, b, c] = q;
    let mut roots = if a == 0.0 {
        if b == 0.0 {
            Vec::new()
        } else {
            vec![-c / b]
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            Vec::new()
        } else {
            let s = disc.sqrt();
            let t = -0.5 * (b + if b >= 0.0 { s } else { -s });
            if t == 0.0 {
                // b = 0 and c = 0
                vec![0.0, 0.0]
            } else {
                vec![t / a, c / t]
            }
        }
    };
    roots.sort_by(f64::total_cmp);
    roots
}

pub fn solve_lambda(q: Quadratic) -> StationaryAnalysis {
    let roots = quadratic_roots(q);
    let roots_in_unit: Vec<f64> = roots.iter().copied().filter(|&r| r > 0.0 && r < 1.0).collect();
    let phase = match roots_in_unit.len() {
        0 => Phase::None,
        1 => Phase::OneRoot,
        _ => Phase::TwoRoots,
    };
    let lambda = (roots_in_unit.len() == 1).then(|| roots_in_unit[0]);
    let stats = roots_in_unit
        .iter()
        .map(|&l| geometric_stats(l).expect("root lies in (0, 1)"))
        .collect();
    let [a, b, c] = q;
    let at_one = a + b + c;
    StationaryAnalysis {
        quad_coeffs: q,
        roots,
        roots_in_unit,
        phase,
        lambda,
        stats,
        one_root_condition: c * at_one < 0.0,
        two_root_condition: c / a < 0.0 && at_one / a < 0.0,
    }
}

pub fn geometric_stats(lambda: f64) -> Result<GeometricStats> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must lie in (0, 1)")));
    }
    let q = 1.0 - lambda;
    Ok(GeometricStats {
        lambda,
        mean_height: lambda / q,
        width_paper: lambda.sqrt() / q,
        width_variance: lambda / (q * q),
    })
}

/// Height at which [`bulk_residual`] evaluates the bracket.
pub const RESIDUAL_K: i32 = 3;

/// `F_k / ((1 - lambda)^5 lambda^(5k))` evaluated on the geometric law at
/// `k = RESIDUAL_K`; independent of `k` and zero at a stationary `lambda`.
pub fn bulk_residual(lambda: f64, params: &MeanFieldParams) -> f64 {
    let p = |k: i32| (1.0 - lambda) * lambda.powi(k);
    let k = RESIDUAL_K;
    bracket(p(k - 1), p(k), p(k + 1), params) / ((1.0 - lambda).powi(5) * lambda.powi(5 * k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(c: [f64; 4], d: [f64; 4]) -> MeanFieldParams {
        MeanFieldParams::new(c, d, 40).unwrap()
    }

    #[test]
    fn zero_inputs_give_zero_rhs() {
        let p = params([1.0, 2.0, 3.0, 4.0], [0.5; 4]);
        let zero = HeightDistribution::new(vec![0.0; 41], 0.0);
        assert!(mf_rhs(&zero, &p).unwrap().iter().all(|&x| x == 0.0));
        let z = params([0.0; 4], [0.0; 4]);
        let g = HeightDistribution::geometric(0.4, 40);
        assert!(mf_rhs(&g, &z).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dimension_checked() {
        let p = params([1.0; 4], [1.0; 4]);
        assert!(matches!(
            mf_rhs(&HeightDistribution::new(vec![1.0; 5], 0.0), &p),
            Err(Error::Dimension { .. })
        ));
        assert!(MeanFieldParams::new([1.0; 4], [1.0; 4], 3).is_err());
        assert!(MeanFieldParams::new([-1.0, 0., 0., 0.], [1.0; 4], 10).is_err());
    }

    #[test]
    fn printed_triple_reads_coefficients() {
        // c2-d2 = 1, c1-d1+c4-d4 = 1.5, c3-d3 = 0.5
        let p = params([1.0, 2.0, 1.5, 1.5], [0.5, 1.0, 1.0, 0.5]);
        let t = stationary_quadratic(&p);
        assert_eq!(t.paper, [1.0, -1.5, 0.5]);
        assert_eq!(t.oracle, [1.0, 1.5, 0.5]);
    }

    #[test]
    fn equal_rates_cancel() {
        let p = params([0.7; 4], [0.7; 4]);
        let t = stationary_quadratic(&p);
        assert_eq!(t.paper, [0.0, 0.0, 0.0]);
        assert_eq!(t.oracle, [0.0, 0.0, 0.0]);
        assert!(bulk_residual(0.3, &p).abs() < 1e-12);
    }

    #[test]
    fn factorable_quadratics() {
        let a = solve_lambda([1.0, -1.5, 0.5]);
        assert_eq!(a.roots, vec![0.5, 1.0]);
        assert_eq!(a.phase, Phase::OneRoot);
        assert_eq!(a.lambda, Some(0.5));
        let b = solve_lambda([1.0, -0.9, 0.2]);
        assert_eq!(b.phase, Phase::TwoRoots);
        assert!((b.roots_in_unit[0] - 0.4).abs() < 1e-15);
        assert!((b.roots_in_unit[1] - 0.5).abs() < 1e-15);
        assert_eq!(b.lambda, None);
        let c = solve_lambda([0.0, 2.0, -0.5]);
        assert_eq!(c.roots, vec![0.25]);
        assert_eq!(c.phase, Phase::OneRoot);
        assert_eq!(solve_lambda([0.0, 0.0, 1.0]).phase, Phase::None);
        assert_eq!(solve_lambda([1.0, 0.0, 1.0]).phase, Phase::None);
    }

    #[test]
    fn stats_at_half() {
        let s = geometric_stats(0.5).unwrap();
        assert_eq!(s.mean_height, 1.0);
        assert!((s.width_paper - 1.41421356).abs() < 1e-8);
        assert_eq!(s.width_variance, 2.0);
        assert!(geometric_stats(1e-12).unwrap().mean_height < 1e-11);
        assert!(geometric_stats(0.0).is_err());
        assert!(geometric_stats(1.0).is_err());
    }

    #[test]
    fn evolve_zero_time_returns_input() {
        let p = params([1.0; 4], [1.0; 4]);
        let p0 = HeightDistribution::point_mass(2, 40);
        let s = mf_evolve(&p0, &p, 0.0, &[0.0]).unwrap();
        assert_eq!(s[0].distribution.probabilities, p0.probabilities);
        assert_eq!(s[0].drift, 0.0);
    }
}
