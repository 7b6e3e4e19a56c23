use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractional::{distributed_derivative, TimeSeries};
use crate::model::Problem;

/// Values `f(t_k, x_j)` on a uniform space-time grid, `t_k = k dt`,
/// `x_j = x0 + j dx` (one space dimension).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeField {
    pub dt: f64,
    pub x0: f64,
    pub dx: f64,
    /// `values[k][j]`.
    pub values: Vec<Vec<f64>>,
}

impl SpaceTimeField {
    pub fn from_fn(dt: f64, steps: usize, x0: f64, dx: f64, nx: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..=steps)
            .map(|k| (0..nx).map(|j| f(k as f64 * dt, x0 + j as f64 * dx)).collect())
            .collect();
        Self { dt, x0, dx, values }
    }

    fn nx(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Linear interpolation in `x` at time index `k`; `None` off the grid.
    fn at(&self, k: usize, x: f64) -> Option<f64> {
        let s = (x - self.x0) / self.dx;
        let n = self.nx();
        if s < -1e-9 || s > (n - 1) as f64 + 1e-9 {
            return None;
        }
        let j = (s.floor().max(0.0) as usize).min(n - 2);
        let w = s - j as f64;
        Some((1.0 - w) * self.values[k][j] + w * self.values[k][j + 1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max: f64,
    pub rms: f64,
    pub count: usize,
    /// `(t, x, residual)` per interior grid point.
    pub residuals: Vec<(f64, f64, f64)>,
}

/// Residual `D f - L f` of a tabulated solution, where `D` is the
/// distributed-order Caputo derivative of the problem (or a backward
/// difference in time for non-fractional problems) and
///
/// ```text
/// L f = -C f - B f' + A f'' + rate * sum_i p_i (f(x - y_i) - f(x) + y_i f'(x) / (1 + y_i^2))
/// ```
///
/// with central differences of width `stencil_h` (a multiple of the grid
/// spacing). The jump part uses the step convention (a jump moves `x` to
/// `x - y`); landing points outside the domain contribute 0, and outside the
/// grid in the whole-space case are an error.
pub fn generator_residual(problem: &Problem, field: &SpaceTimeField, stencil_h: f64) -> Result<ResidualReport> {
    if problem.dim() != 1 {
        return Err(Error::invalid("generator residuals are one-dimensional"));
    }
    let nt = field.values.len();
    let nx = field.nx();
    if field.values.iter().any(|r| r.len() != nx) {
        return Err(Error::GridTooCoarse("ragged space-time field".into()));
    }
    if !(field.dt > 0.0) || !(field.dx > 0.0) {
        return Err(Error::GridTooCoarse("grid spacings must be positive".into()));
    }
    let m = (stencil_h / field.dx).round();
    if !(m >= 1.0) || (m * field.dx - stencil_h).abs() > 1e-9 * stencil_h {
        return Err(Error::GridTooCoarse(format!(
            "stencil width {stencil_h} is not a positive multiple of the spacing {}",
            field.dx
        )));
    }
    let m = m as usize;
    if nt < 2 || nx < 2 * m + 1 {
        return Err(Error::GridTooCoarse(format!(
            "need at least 2 times and {} points in space, got {nt} x {nx}",
            2 * m + 1
        )));
    }
    let h = stencil_h;
    let coeffs = &problem.coeffs;
    let mut a = [0.0];
    let mut b = [0.0];
    let mut residuals = Vec::new();
    for j in m..nx - m {
        let x = field.x0 + j as f64 * field.dx;
        if let Some(g) = &problem.domain {
            if !g.contains(&[x]) {
                continue;
            }
        }
        let series: Vec<f64> = field.values.iter().map(|r| r[j]).collect();
        let dt_f = match &problem.fractional {
            Some(mu) => distributed_derivative(&TimeSeries::new(field.dt, series.clone())?, mu)?.values,
            None => {
                let mut d = vec![0.0; nt];
                for k in 1..nt {
                    d[k] = (series[k] - series[k - 1]) / field.dt;
                }
                d
            }
        };
        coeffs.diffusion_at(&[x], &mut a);
        coeffs.drift_at(&[x], &mut b);
        let c = coeffs.killing_at(&[x]);
        for k in 1..nt {
            let row = &field.values[k];
            let f = row[j];
            let fx = (row[j + m] - row[j - m]) / (2.0 * h);
            let fxx = (row[j + m] - 2.0 * f + row[j - m]) / (h * h);
            let mut lf = -c * f - b[0] * fx + a[0] * fxx;
            if let Some(jump) = coeffs.jump() {
                let mut s = 0.0;
                for (y, p) in jump.atoms() {
                    let y = y[0];
                    let land = x - y;
                    let v = match (&problem.domain, field.at(k, land)) {
                        (Some(g), _) if !g.contains(&[land]) => 0.0,
                        (_, Some(v)) => v,
                        (_, None) => {
                            return Err(Error::GridTooCoarse(format!(
                                "jump from {x} lands at {land}, outside the tabulated range"
                            )))
                        }
                    };
                    s += p * (v - f + y * fx / (1.0 + y * y));
                }
                lf += jump.rate() * s;
            }
            residuals.push((k as f64 * field.dt, x, dt_f[k] - lf));
        }
    }
    if residuals.is_empty() {
        return Err(Error::GridTooCoarse("no interior grid point inside the domain".into()));
    }
    let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.2.abs()));
    let rms = (residuals.iter().map(|r| r.2 * r.2).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(ResidualReport {
        max,
        rms,
        count: residuals.len(),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{catalog, Domain, InitialCondition};
    use std::f64::consts::PI;

    fn dirichlet() -> Problem {
        Problem::new(
            catalog::heat(1, 1.0).unwrap(),
            Some(Domain::interval(0.0, PI).unwrap()),
            InitialCondition::sine(),
            None,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let f = SpaceTimeField::from_fn(0.1, 5, 0.0, 0.1, 20, |_, _| 0.0);
        let r = generator_residual(&dirichlet(), &f, 0.1).unwrap();
        assert_eq!(r.max, 0.0);
    }

    #[test]
    fn eigenmode_residual_converges() {
        let p = dirichlet();
        let res = |h: f64, dt: f64| {
            let nx = (PI / h).round() as usize + 1;
            let steps = (0.5 / dt).round() as usize;
            let f = SpaceTimeField::from_fn(dt, steps, 0.0, h, nx, |t, x| (-t).exp() * x.sin());
            generator_residual(&p, &f, h).unwrap().max
        };
        let coarse = res(PI / 20.0, 0.01);
        let fine = res(PI / 40.0, 0.005);
        assert!(fine < 0.6 * coarse, "{coarse} -> {fine}");
        assert!(fine < 5e-3);
    }

    #[test]
    fn coarse_grids_rejected() {
        let f = SpaceTimeField::from_fn(0.1, 3, 0.0, 0.5, 2, |_, _| 0.0);
        assert!(matches!(generator_residual(&dirichlet(), &f, 0.5), Err(Error::GridTooCoarse(_))));
        let f = SpaceTimeField::from_fn(0.1, 3, 0.0, 0.1, 20, |_, _| 0.0);
        assert!(matches!(generator_residual(&dirichlet(), &f, 0.15), Err(Error::GridTooCoarse(_))));
    }
}
