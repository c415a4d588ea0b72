use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    /// Exponent estimate.
    pub slope: f64,
    /// Natural log of the prefactor.
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least-squares line through `(ln t, ln value)`.
pub fn fit_exponent(series: &[(f64, f64)]) -> Result<PowerFit> {
    if series.len() < 5 {
        return Err(Error::Domain(format!("need at least 5 points, got {}", series.len())));
    }
    if let Some(&(t, v)) = series.iter().find(|(t, v)| !(*t > 0.0 && *v > 0.0 && t.is_finite() && v.is_finite())) {
        return Err(Error::Domain(format!("nonpositive data point ({t}, {v})")));
    }
    let n = series.len() as f64;
    let xs: Vec<f64> = series.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|(_, v)| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all times coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(PowerFit { slope, intercept, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_power_laws() {
        let ts: Vec<f64> = (0..11).map(|i| 2f64.powi(i)).collect();
        let f = fit_exponent(&ts.iter().map(|&t| (t, t.powf(1.0 / 6.0))).collect::<Vec<_>>()).unwrap();
        assert!((f.slope - 1.0 / 6.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let f = fit_exponent(&ts.iter().map(|&t| (t, 3.0 * t.powf(0.25))).collect::<Vec<_>>()).unwrap();
        assert!((f.slope - 0.25).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_series() {
        assert!(fit_exponent(&[(1.0, 1.0); 4]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0)]).is_err());
        assert!(fit_exponent(&[(1.0, 1.0); 6]).is_err());
    }
}
