use serde::{Deserialize, Serialize};

use super::fit::{fit_exponent, PowerFit};
use super::profile::{pk_t, pk_t_printed, SelfSimilarParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PkForm {
    /// `s^(-1/6) f(l s^(-1/6))` at `l = eps k`, `s = eps^2 t`.
    Consistent,
    /// The closed form of [`pk_t_printed`].
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KDomain {
    /// `k >= 0`, renormalized over that half line.
    #[default]
    Nonnegative,
    /// `k` over all integers.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PkMoments {
    pub t: f64,
    /// `sum_k P_k(t)` before renormalization.
    pub mass: f64,
    /// `sum_k k P_k(t)` before renormalization.
    pub first_moment: f64,
    pub mean: f64,
    pub variance: f64,
    /// Largest `|k|` with `P_k(t) > 0`.
    pub support: i64,
}

const SUPPORT_CAP: i64 = 50_000_000;

pub fn pk_moments(p: &SelfSimilarParams, t: f64, form: PkForm, domain: KDomain) -> Result<PkMoments> {
    let eval = |k: i64| match form {
        PkForm::Consistent => pk_t(k, t, p),
        PkForm::Printed => pk_t_printed(k, t, p),
    };
    let mut support = -1;
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for k in 0..SUPPORT_CAP {
        let v = eval(k)?;
        if v <= 0.0 {
            break;
        }
        support = k;
        let kf = k as f64;
        let copies = match domain {
            KDomain::Symmetric if k > 0 => 2.0,
            _ => 1.0,
        };
        m0 += copies * v;
        m2 += copies * kf * kf * v;
        if domain == KDomain::Nonnegative {
            m1 += kf * v;
        }
    }
    if support < 0 {
        return Err(Error::Domain(format!("P_k({t}) vanishes at k = 0")));
    }
    let mean = m1 / m0;
    Ok(PkMoments {
        t,
        mass: m0,
        first_moment: m1,
        mean,
        variance: m2 / m0 - mean * mean,
        support,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFits {
    pub form: PkForm,
    pub moments: Vec<PkMoments>,
    /// Absent on the symmetric domain, where the mean is identically 0.
    pub mean: Option<PowerFit>,
    pub variance: PowerFit,
    pub mass: PowerFit,
    pub first_moment: Option<PowerFit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentClaim {
    pub mean_height: f64,
    pub width_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub params: SelfSimilarParams,
    pub domain: KDomain,
    pub times: Vec<f64>,
    /// Growth exponents stated alongside the closed form.
    pub stated: ExponentClaim,
    /// Exponents implied by the similarity variable `k ~ t^(1/6)`.
    pub similarity: ExponentClaim,
    pub printed: MomentFits,
    pub consistent: MomentFits,
}

fn fits(p: &SelfSimilarParams, times: &[f64], form: PkForm, domain: KDomain) -> Result<MomentFits> {
    let moments = times
        .iter()
        .map(|&t| pk_moments(p, t, form, domain))
        .collect::<Result<Vec<_>>>()?;
    let series = |f: fn(&PkMoments) -> f64| -> Vec<(f64, f64)> { moments.iter().map(|m| (m.t, f(m))).collect() };
    let nonneg = domain == KDomain::Nonnegative;
    Ok(MomentFits {
        form,
        mean: if nonneg { Some(fit_exponent(&series(|m| m.mean))?) } else { None },
        variance: fit_exponent(&series(|m| m.variance))?,
        mass: fit_exponent(&series(|m| m.mass))?,
        first_moment: if nonneg { Some(fit_exponent(&series(|m| m.first_moment))?) } else { None },
        moments,
    })
}

pub fn exponent_report(p: &SelfSimilarParams, times: &[f64], domain: KDomain) -> Result<ExponentReport> {
    Ok(ExponentReport {
        params: *p,
        domain,
        times: times.to_vec(),
        stated: ExponentClaim { mean_height: 1.0 / 12.0, width_sq: 0.25 },
        similarity: ExponentClaim { mean_height: 1.0 / 6.0, width_sq: 1.0 / 3.0 },
        printed: fits(p, times, PkForm::Printed, domain)?,
        consistent: fits(p, times, PkForm::Consistent, domain)?,
    })
}
