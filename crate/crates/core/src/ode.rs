//! Adaptive Dormand–Prince 5(4) integrator for autonomous or
//! time-dependent systems `y' = f(t, y)`.
//!
//! Steps are clipped so every requested output time is hit exactly; no dense
//! output is used. The error estimate is the RMS of the embedded difference
//! scaled by `atol + rtol * max(|y|, |y_new|)`.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest step allowed; `f64::INFINITY` for none.
    pub h_max: f64,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 10_000_000, h_max: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl DormandPrince {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// Integrates from `t0` through each of `output_times` (sorted, `>= t0`)
    /// and returns the state at each of them. `on_step` sees every accepted
    /// step and may abort the run by returning an error.
    pub fn integrate<F, S>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: &[f64],
        output_times: &[f64],
        mut on_step: S,
    ) -> Result<(Vec<Vec<f64>>, StepStats)>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        S: FnMut(f64, &[f64]) -> Result<()>,
    {
        let dim = y0.len();
        let mut stats = StepStats::default();
        let mut out = Vec::with_capacity(output_times.len());
        let mut y = y0.to_vec();
        let mut t = t0;

        let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; dim]);
        let mut tmp = vec![0.0; dim];
        let mut y_new = vec![0.0; dim];

        rhs(t, &y, &mut k[0]);
        stats.evaluations += 1;
        let mut h = self.initial_step(&y, &k[0], output_times.last().map_or(0.0, |&e| e - t0));
        let mut prev_err: f64 = 1e-4;

        for &t_out in output_times {
            if t_out < t {
                return Err(Error::Integration {
                    t,
                    reason: format!("output time {t_out} precedes current time"),
                });
            }
            while t < t_out {
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(Error::Integration { t, reason: "step budget exhausted".into() });
                }
                let remaining = t_out - t;
                let last = h >= remaining;
                let step = if last { remaining } else { h };
                if step <= f64::EPSILON * t.abs().max(1.0) * 16.0 && !last {
                    return Err(Error::Integration { t, reason: format!("step size underflow (h={step:e})") });
                }

                for i in 0..dim {
                    tmp[i] = y[i] + step * A21 * k[0][i];
                }
                rhs(t + C2 * step, &tmp, &mut k[1]);
                for i in 0..dim {
                    tmp[i] = y[i] + step * (A31 * k[0][i] + A32 * k[1][i]);
                }
                rhs(t + C3 * step, &tmp, &mut k[2]);
                for i in 0..dim {
                    tmp[i] = y[i] + step * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
                }
                rhs(t + C4 * step, &tmp, &mut k[3]);
                for i in 0..dim {
                    tmp[i] = y[i]
                        + step * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
                }
                rhs(t + C5 * step, &tmp, &mut k[4]);
                for i in 0..dim {
                    tmp[i] = y[i]
                        + step
                            * (A61 * k[0][i]
                                + A62 * k[1][i]
                                + A63 * k[2][i]
                                + A64 * k[3][i]
                                + A65 * k[4][i]);
                }
                rhs(t + step, &tmp, &mut k[5]);
                for i in 0..dim {
                    y_new[i] = y[i]
                        + step
                            * (A71 * k[0][i]
                                + A73 * k[2][i]
                                + A74 * k[3][i]
                                + A75 * k[4][i]
                                + A76 * k[5][i]);
                }
                rhs(t + step, &y_new, &mut k[6]);
                stats.evaluations += 6;

                let mut err_sq = 0.0;
                for i in 0..dim {
                    let e = step
                        * (E1 * k[0][i]
                            + E3 * k[2][i]
                            + E4 * k[3][i]
                            + E5 * k[4][i]
                            + E6 * k[5][i]
                            + E7 * k[6][i]);
                    let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                    err_sq += (e / scale).powi(2);
                }
                let err = if dim == 0 { 0.0 } else { (err_sq / dim as f64).sqrt() };
                if !err.is_finite() {
                    return Err(Error::Integration { t, reason: "non-finite error estimate".into() });
                }

                if err <= 1.0 {
                    stats.accepted += 1;
                    t = if last { t_out } else { t + step };
                    std::mem::swap(&mut y, &mut y_new);
                    k.swap(0, 6);
                    on_step(t, &y)?;
                    // PI controller
                    let factor = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0)
                    };
                    prev_err = err.max(1e-4);
                    if !last || factor < 1.0 {
                        h = (step * factor).min(self.h_max);
                    }
                } else {
                    stats.rejected += 1;
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                }
            }
            out.push(y.clone());
        }
        Ok((out, stats))
    }

    fn initial_step(&self, y: &[f64], dy: &[f64], span: f64) -> f64 {
        let dim = y.len().max(1) as f64;
        let (mut d0, mut d1) = (0.0, 0.0);
        for (yi, fi) in y.iter().zip(dy) {
            let sc = self.atol + self.rtol * yi.abs();
            d0 += (yi / sc).powi(2);
            d1 += (fi / sc).powi(2);
        }
        let (d0, d1) = ((d0 / dim).sqrt(), (d1 / dim).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h = h.min(self.h_max);
        if span > 0.0 {
            h.min(span)
        } else {
            h
        }
    }
}
