use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::SubordinationMeasure;
use crate::error::{Error, Result};

/// Samples `u(k dt)`, `k = 0..len`, on a uniform grid starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        let s = Self { dt, values };
        s.check()?;
        Ok(s)
    }

    /// `u` sampled at `steps + 1` points of `[0, t_end]`.
    pub fn from_fn(t_end: f64, steps: usize, u: impl Fn(f64) -> f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::BadGrid("need at least one step".into()));
        }
        let dt = t_end / steps as f64;
        Self::new(dt, (0..=steps).map(|k| u(k as f64 * dt)).collect())
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::BadGrid(format!("spacing must be positive, got {}", self.dt)));
        }
        if self.values.len() < 2 {
            return Err(Error::BadGrid("need u(0) and at least one more sample".into()));
        }
        if let Some(k) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadGrid(format!("non-finite sample at index {k}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("checked non-empty")
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("order must lie in (0, 1), got {beta}")))
    }
}

/// Caputo derivative of order `beta` by the L1 scheme:
///
/// ```text
/// D u(t_k) ~ dt^{-beta} / Gamma(2 - beta) * sum_{j<k} b_j (u_{k-j} - u_{k-j-1}),
/// b_j = (j+1)^{1-beta} - j^{1-beta}
/// ```
///
/// exact for piecewise-linear `u`. The value at `t = 0` is reported as 0.
pub fn caputo(u: &TimeSeries, beta: f64) -> Result<TimeSeries> {
    u.check()?;
    check_beta(beta)?;
    let n = u.len();
    let a = 1.0 - beta;
    let b: Vec<f64> = (0..n).map(|j| ((j + 1) as f64).powf(a) - (j as f64).powf(a)).collect();
    let diff: Vec<f64> = u.values.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = u.dt.powf(-beta) / gamma(2.0 - beta);
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        // diff[k - 1 - j] = u_{k-j} - u_{k-j-1}
        let s: f64 = (0..k).map(|j| b[j] * diff[k - 1 - j]).sum();
        *o = scale * s;
    }
    Ok(TimeSeries { dt: u.dt, values: out })
}

/// Fractional integral of order `alpha` in `(0, 1]` by the product
/// trapezoidal rule (exact for piecewise-linear `u`).
fn fractional_integral(u: &TimeSeries, alpha: f64) -> Vec<f64> {
    let n = u.len();
    let p = alpha + 1.0;
    let scale = u.dt.powf(alpha) / gamma(alpha + 2.0);
    let pw: Vec<f64> = (0..=n).map(|m| (m as f64).powf(p)).collect();
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let mut s = ((kf - 1.0).powf(p) - (kf - alpha - 1.0) * kf.powf(alpha)) * u.values[0];
        for j in 1..k {
            let m = k - j;
            s += (pw[m + 1] - 2.0 * pw[m] + pw[m - 1]) * u.values[j];
        }
        s += u.values[k];
        *o = scale * s;
    }
    out
}

/// Riemann–Liouville derivative of order `beta`: the time derivative of
/// the order-`(1 - beta)` memory integral, the latter by product
/// trapezoids and the derivative by central differences (one-sided second
/// order at the last sample). At `t = 0` the derivative is singular unless
/// `u(0) = 0`; that sample is NaN in the singular case, 0 otherwise.
pub fn riemann_liouville(u: &TimeSeries, beta: f64) -> Result<TimeSeries> {
    u.check()?;
    check_beta(beta)?;
    let n = u.len();
    let i = fractional_integral(u, 1.0 - beta);
    let h = u.dt;
    let mut out = vec![0.0; n];
    out[0] = if u.values[0] == 0.0 { 0.0 } else { f64::NAN };
    for k in 1..n {
        out[k] = if k + 1 < n {
            (i[k + 1] - i[k - 1]) / (2.0 * h)
        } else if k >= 2 {
            (3.0 * i[k] - 4.0 * i[k - 1] + i[k - 2]) / (2.0 * h)
        } else {
            (i[k] - i[k - 1]) / h
        };
    }
    Ok(TimeSeries { dt: h, values: out })
}

/// `D^mu u = sum_i w_i D^{beta_i} u` with Caputo derivatives.
pub fn distributed_derivative(u: &TimeSeries, mu: &SubordinationMeasure) -> Result<TimeSeries> {
    let mut out = vec![0.0; u.len()];
    for &(beta, w) in mu.atoms() {
        let d = caputo(u, beta)?;
        for (o, v) in out.iter_mut().zip(&d.values) {
            *o += w * v;
        }
    }
    Ok(TimeSeries { dt: u.dt, values: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bad_grids() {
        assert!(matches!(TimeSeries::new(0.0, vec![1.0, 2.0]), Err(Error::BadGrid(_))));
        assert!(matches!(TimeSeries::new(0.1, vec![1.0]), Err(Error::BadGrid(_))));
        assert!(matches!(TimeSeries::new(0.1, vec![1.0, f64::NAN]), Err(Error::BadGrid(_))));
    }

    #[test]
    fn caputo_of_linear_is_exact() {
        let u = TimeSeries::from_fn(1.0, 50, |t| t).unwrap();
        let d = caputo(&u, 0.5).unwrap();
        assert!((d.last() - 2.0 / PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn constants_have_zero_caputo() {
        let u = TimeSeries::from_fn(1.0, 20, |_| 3.0).unwrap();
        assert!(caputo(&u, 0.3).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn memory_integral_of_constant() {
        let u = TimeSeries::from_fn(1.0, 40, |_| 1.0).unwrap();
        let i = fractional_integral(&u, 0.5);
        assert!((i[40] - 1.0 / gamma(1.5)).abs() < 1e-12);
        let rl = riemann_liouville(&u, 0.5).unwrap();
        assert!(rl.values[0].is_nan());
        assert!((rl.last() - 1.0 / PI.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn bad_order() {
        let u = TimeSeries::from_fn(1.0, 4, |t| t).unwrap();
        assert!(caputo(&u, 1.0).is_err());
        assert!(riemann_liouville(&u, 0.0).is_err());
    }
}
