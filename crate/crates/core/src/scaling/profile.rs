use serde::{Deserialize, Serialize};

use super::quad::tanh_sinh;
use crate::error::{Error, Result};

/// Constants of the similarity solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarParams {
    /// Continuum diffusion coefficient.
    pub a: f64,
    pub c1: f64,
    /// Lattice spacing in `l = eps k`, `s = eps^2 t`.
    pub epsilon: f64,
    pub gamma: f64,
    pub c0: f64,
}

impl SelfSimilarParams {
    pub fn new(a: f64, c1: f64, epsilon: f64) -> Self {
        Self { a, c1, epsilon, gamma: 1.0 / 6.0, c0: 0.0 }
    }

    /// `C1` chosen so that `int f dx = 1`.
    pub fn normalized(a: f64, epsilon: f64) -> Result<Self> {
        let unit = Self::new(a, 1.0, epsilon);
        // mass scales as C1^(3/4)
        let mass = profile_mass(&unit)?;
        Ok(Self::new(a, mass.powf(-4.0 / 3.0), epsilon))
    }

    fn check(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::Domain(format!("A = {} must be positive", self.a)));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::Domain(format!("C1 = {} must be positive", self.c1)));
        }
        Ok(())
    }

    /// Half-width of the support of `f`.
    pub fn support_edge(&self) -> f64 {
        (15.0 * self.a * self.c1).sqrt()
    }
}

/// `(C1 - x^2 / (15 A))^(1/4)` inside the support, 0 outside.
pub fn barenblatt_f(x: f64, p: &SelfSimilarParams) -> Result<f64> {
    p.check()?;
    Ok(radicand(x, p).max(0.0).powf(0.25))
}

fn radicand(x: f64, p: &SelfSimilarParams) -> f64 {
    p.c1 - x * x / (15.0 * p.a)
}

/// `int f dx` over the support.
pub fn profile_mass(p: &SelfSimilarParams) -> Result<f64> {
    p.check()?;
    let edge = p.support_edge();
    Ok(tanh_sinh(|x| radicand(x, p).max(0.0).powf(0.25), -edge, edge, 1e-14))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DerivativeMode {
    /// `d/dx f^5 = -x f / (6 A)`.
    Analytic,
    /// Central difference with step `h`.
    FiniteDifference { h: f64 },
}

/// `max |gamma x f + A (f^5)' - C0|` over `xs`, all strictly inside the support.
pub fn similarity_ode_residual(p: &SelfSimilarParams, xs: &[f64], mode: DerivativeMode) -> Result<f64> {
    p.check()?;
    let edge = p.support_edge();
    let mut worst: f64 = 0.0;
    for &x in xs {
        let reach = match mode {
            DerivativeMode::Analytic => 0.0,
            DerivativeMode::FiniteDifference { h } => h,
        };
        if x.abs() + reach >= edge {
            return Err(Error::Domain(format!("x = {x} is not inside the support (-{edge}, {edge})")));
        }
        let f = barenblatt_f(x, p)?;
        let d_f5 = match mode {
            DerivativeMode::Analytic => -x * f / (6.0 * p.a),
            DerivativeMode::FiniteDifference { h } => {
                (barenblatt_f(x + h, p)?.powi(5) - barenblatt_f(x - h, p)?.powi(5)) / (2.0 * h)
            }
        };
        worst = worst.max((p.gamma * x * f + p.a * d_f5 - p.c0).abs());
    }
    Ok(worst)
}

/// `s^(-gamma) f(l s^(-gamma))`.
pub fn self_similar_p(l: f64, s: f64, p: &SelfSimilarParams) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s = {s} must be positive")));
    }
    let scale = s.powf(-p.gamma);
    Ok(scale * barenblatt_f(l * scale, p)?)
}

/// One-site law at height `k` and time `t` through `l = eps k`, `s = eps^2 t`.
pub fn pk_t(k: i64, t: f64, p: &SelfSimilarParams) -> Result<f64> {
    let e = p.epsilon;
    self_similar_p(e * k as f64, e * e * t, p)
}

/// The closed form `(C1 eps^(-1/2) t^(-1/3) - eps k^2 / (15 A t^(2/3)))^(1/4)`,
/// clipped to 0 outside its support. Not identical to [`pk_t`]; see the
/// exponent report.
pub fn pk_t_printed(k: i64, t: f64, p: &SelfSimilarParams) -> Result<f64> {
    p.check()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("t = {t} must be positive")));
    }
    let k = k as f64;
    let r = p.c1 / p.epsilon.sqrt() * t.powf(-1.0 / 3.0)
        - p.epsilon / (15.0 * p.a) * k * k / t.powf(2.0 / 3.0);
    Ok(r.max(0.0).powf(0.25))
}

/// Points `(l, s)` and the finite-difference step used in both variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub ls: Vec<f64>,
    pub ss: Vec<f64>,
    pub h: f64,
}

/// `max |dP/ds - A (5 P^4 P'' + 20 P^3 P'^2)|` by central differences over
/// the grid. Every stencil point must lie where the profile is positive.
pub fn pde_residual<F>(profile: F, a: f64, grid: &PdeGrid) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let h = grid.h;
    let mut worst: f64 = 0.0;
    for &s in &grid.ss {
        if s - h <= 0.0 {
            return Err(Error::Domain(format!("stencil at s = {s} reaches s <= 0")));
        }
        for &l in &grid.ls {
            let at = |l: f64, s: f64| -> Result<f64> {
                let v = profile(l, s)?;
                if v <= 0.0 {
                    return Err(Error::Domain(format!("stencil point ({l}, {s}) touches the support boundary")));
                }
                Ok(v)
            };
            let c = at(l, s)?;
            let (lm, lp) = (at(l - h, s)?, at(l + h, s)?);
            let (sm, sp) = (at(l, s - h)?, at(l, s + h)?);
            let dp_ds = (sp - sm) / (2.0 * h);
            let dp_dl = (lp - lm) / (2.0 * h);
            let d2p_dl2 = (lp - 2.0 * c + lm) / (h * h);
            let rhs = a * (5.0 * c.powi(4) * d2p_dl2 + 20.0 * c.powi(3) * dp_dl * dp_dl);
            worst = worst.max((dp_ds - rhs).abs());
        }
    }
    Ok(worst)
}

/// Residuals of the closed form at steps `h0, h0/2, ...` and the observed
/// orders `log2(r_i / r_{i+1})`.
pub fn pde_convergence(
    p: &SelfSimilarParams,
    ls: &[f64],
    ss: &[f64],
    h0: f64,
    levels: usize,
) -> Result<(Vec<(f64, f64)>, Vec<f64>)> {
    let mut rows = Vec::with_capacity(levels);
    let mut h = h0;
    for _ in 0..levels {
        let grid = PdeGrid { ls: ls.to_vec(), ss: ss.to_vec(), h };
        rows.push((h, pde_residual(|l, s| self_similar_p(l, s, p), p.a, &grid)?));
        h *= 0.5;
    }
    let orders = rows.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
    Ok((rows, orders))
}
