//! Closed-form references: Gaussian heat solutions, Dirichlet eigenfunction
//! expansions on intervals and boxes, and the complementary error function.

use std::f64::consts::PI;

use super::quad::adaptive_gk;
use crate::error::{Error, Result};

/// `erfc` from the Maclaurin series of `erf` for `|x| <= 1.5` and a Lentz
/// continued fraction beyond.
pub fn erfc_series(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc_series(-x);
    }
    if x <= 1.5 {
        // erf x = 2/sqrt(pi) sum_n (-1)^n x^{2n+1} / (n! (2n+1))
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x2 / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() || n > 200.0 {
                break;
            }
        }
        1.0 - 2.0 / PI.sqrt() * sum
    } else {
        // erfc x = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for k in 1..200 {
            let a = k as f64 / 2.0;
            d = x + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / (PI.sqrt() * f)
    }
}

/// Gaussian initial data `amplitude * exp(-|x - center|^2 / (2 width^2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianData {
    pub center: Vec<f64>,
    pub width: f64,
    pub amplitude: f64,
}

impl GaussianData {
    pub fn standard() -> Self {
        Self {
            center: vec![0.0],
            width: 1.0,
            amplitude: 1.0,
        }
    }
}

/// Solution of `u_t = a Δu` with Gaussian data: the variance grows by
/// `2 a t` per axis, `u = amp (w^2/(w^2 + 2at))^{d/2} exp(-|x - c|^2 / (2(w^2 + 2at)))`.
pub fn heat_exact(a: f64, t: f64, x: &[f64], f0: &GaussianData) -> f64 {
    heat_exact_with(a, None, 0.0, t, x, f0)
}

/// [`heat_exact`] with a constant drift `b` and killing rate `c`:
/// `u_t = a Δu - b.∇u - c u`, i.e. the profile moves to `center + b t` and
/// decays by `exp(-c t)`.
pub fn heat_exact_with(a: f64, b: Option<&[f64]>, c: f64, t: f64, x: &[f64], f0: &GaussianData) -> f64 {
    let w2 = f0.width * f0.width;
    let s2 = w2 + 2.0 * a * t;
    let d = x.len() as f64;
    let r2: f64 = x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let shift = b.map_or(0.0, |b| b[i] * t);
            (xi - f0.center[i] - shift).powi(2)
        })
        .sum();
    f0.amplitude * (-c * t).exp() * (w2 / s2).powf(d / 2.0) * (-r2 / (2.0 * s2)).exp()
}

/// Sine-series solution of `u_t = a Δu` on a box (or interval) with zero
/// Dirichlet data.
#[derive(Debug, Clone)]
pub struct EigenExpansion {
    lo: Vec<f64>,
    hi: Vec<f64>,
    a: f64,
    modes: usize,
    /// Row-major over mode multi-indices `1..=modes` per axis.
    coeffs: Vec<f64>,
    /// `|c_k|` for the extra modes `modes+1..=2 modes` (interval only), used
    /// in the tail bound.
    extra: Vec<f64>,
    sup_f0: f64,
    reconstruction_error: f64,
}

impl EigenExpansion {
    pub fn interval(lo: f64, hi: f64, a: f64, f0: &dyn Fn(f64) -> f64, modes: usize) -> Result<Self> {
        Self::boxed(vec![lo], vec![hi], a, &|x: &[f64]| f0(x[0]), modes)
    }

    /// Coefficients `c_k = (2/L)^d ∫ f0 prod_i sin(k_i pi (x_i - lo_i)/L_i)`
    /// by adaptive Gauss–Kronrod (nested in 2-d).
    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>, a: f64, f0: &dyn Fn(&[f64]) -> f64, modes: usize) -> Result<Self> {
        let d = lo.len();
        if d == 0 || d > 2 || hi.len() != d {
            return Err(Error::invalid("eigen expansions cover intervals and 2-d boxes"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) || !(a > 0.0) || modes == 0 {
            return Err(Error::invalid("need lo < hi, a > 0 and at least one mode"));
        }
        let len: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
        let tol = 1e-13;
        let coeff = |k: &[usize]| -> Result<f64> {
            let norm: f64 = len.iter().map(|l| 2.0 / l).product();
            let mode = |i: usize, x: f64| (k[i] as f64 * PI * (x - lo[i]) / len[i]).sin();
            let v = if d == 1 {
                adaptive_gk(&|x| f0(&[x]) * mode(0, x), lo[0], hi[0], tol)?.0
            } else {
                let inner = |x: f64| -> f64 {
                    adaptive_gk(&|y| f0(&[x, y]) * mode(1, y), lo[1], hi[1], tol)
                        .map(|r| r.0)
                        .unwrap_or(f64::NAN)
                };
                adaptive_gk(&|x| inner(x) * mode(0, x), lo[0], hi[0], tol)?.0
            };
            if v.is_nan() {
                return Err(Error::ToleranceNotMet { estimate: f64::NAN, tol });
            }
            Ok(norm * v)
        };
        let mut coeffs = Vec::new();
        let mut extra = Vec::new();
        if d == 1 {
            for k in 1..=modes {
                coeffs.push(coeff(&[k])?);
            }
            for k in modes + 1..=2 * modes {
                extra.push(coeff(&[k])?.abs());
            }
        } else {
            for k1 in 1..=modes {
                for k2 in 1..=modes {
                    coeffs.push(coeff(&[k1, k2])?);
                }
            }
        }
        let mut exp = Self {
            lo,
            hi,
            a,
            modes,
            coeffs,
            extra,
            sup_f0: 0.0,
            reconstruction_error: 0.0,
        };
        // probe grid: sup of f0 and of the reconstruction error
        let per_axis: usize = if d == 1 { 401 } else { 41 };
        let mut sup = 0.0f64;
        let mut rec = 0.0f64;
        let mut p = vec![0.0; d];
        let total = per_axis.pow(d as u32);
        for idx in 0..total {
            let mut r = idx;
            for i in 0..d {
                let j = r % per_axis;
                r /= per_axis;
                p[i] = exp.lo[i] + (exp.hi[i] - exp.lo[i]) * j as f64 / (per_axis - 1) as f64;
            }
            let f = f0(&p);
            sup = sup.max(f.abs());
            rec = rec.max((f - exp.series(0.0, &p)).abs());
        }
        exp.sup_f0 = sup;
        exp.reconstruction_error = rec;
        Ok(exp)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `max |f0 - partial sum|` on the probe grid.
    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    fn lambda(&self, i: usize, k: usize) -> f64 {
        let l = self.hi[i] - self.lo[i];
        self.a * (k as f64 * PI / l).powi(2)
    }

    fn series(&self, t: f64, x: &[f64]) -> f64 {
        let d = self.lo.len();
        let m = self.modes;
        let s = |i: usize, k: usize| (k as f64 * PI * (x[i] - self.lo[i]) / (self.hi[i] - self.lo[i])).sin();
        if d == 1 {
            (1..=m)
                .map(|k| self.coeffs[k - 1] * (-self.lambda(0, k) * t).exp() * s(0, k))
                .sum()
        } else {
            let mut v = 0.0;
            for k1 in 1..=m {
                for k2 in 1..=m {
                    let c = self.coeffs[(k1 - 1) * m + k2 - 1];
                    v += c * (-(self.lambda(0, k1) + self.lambda(1, k2)) * t).exp() * s(0, k1) * s(1, k2);
                }
            }
            v
        }
    }

    /// Bound on the omitted modes at time `t`,
    /// `sum_{k > K} |c_k| exp(-lambda_k t)`: computed coefficients up to
    /// `2K` (interval), and `|c_k| <= 2^d sup|f0|` beyond, summed by an
    /// integral comparison.
    pub fn tail_bound(&self, t: f64) -> f64 {
        let d = self.lo.len();
        // sum_{k > m} exp(-g k^2) <= int_m^inf exp(-g s^2) ds
        let gauss_tail = |g: f64, m: usize| -> f64 {
            if g <= 0.0 {
                return f64::INFINITY;
            }
            0.5 * (PI / g).sqrt() * erfc_series(m as f64 * g.sqrt())
        };
        let cmax = 2f64.powi(d as i32) * self.sup_f0;
        let g: Vec<f64> = (0..d).map(|i| self.lambda(i, 1) * t).collect();
        if d == 1 {
            let k = self.modes;
            let near: f64 = self
                .extra
                .iter()
                .enumerate()
                .map(|(j, c)| c * (-self.lambda(0, k + 1 + j) * t).exp())
                .sum();
            near + cmax * gauss_tail(g[0], 2 * k)
        } else {
            // some index beyond K: union bound over the axis that exceeds it
            let full: Vec<f64> = g.iter().map(|&gi| gauss_tail(gi, 0).min(1.0 / (1.0 - (-gi).exp()))).collect();
            cmax * (gauss_tail(g[0], self.modes) * full[1] + gauss_tail(g[1], self.modes) * full[0])
        }
    }
}

/// Value of the expansion at `(t, x)`; 0 outside the open box.
pub fn dirichlet_exact(exp: &EigenExpansion, t: f64, x: &[f64]) -> f64 {
    let inside = x
        .iter()
        .zip(exp.lo.iter().zip(&exp.hi))
        .all(|(&xi, (&l, &h))| xi > l && xi < h);
    if !inside {
        return 0.0;
    }
    exp.series(t, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_matches_known_values() {
        assert!((erfc_series(1.0) - 0.157_299_207_050_285_13).abs() < 1e-15);
        assert!((erfc_series(0.0) - 1.0).abs() < 1e-16);
        assert!((erfc_series(4.0) - 1.541_725_790_028_002e-8).abs() < 1e-21);
        assert!((erfc_series(-1.0) - 1.842_700_792_949_715).abs() < 1e-15);
        assert!((erfc_series(3.0) / 2.209_049_699_858_544_5e-5 - 1.0).abs() < 1e-13);
        assert!((erfc_series(1.6) / 0.023_651_616_655_355_7 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn heat_values() {
        let g = GaussianData::standard();
        assert!((heat_exact(0.5, 1.0, &[0.0], &g) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(heat_exact(0.5, 0.0, &[0.7], &g), (-0.245f64).exp());
        assert!(heat_exact(0.5, 1.0, &[60.0], &g) < 1e-300);
    }

    #[test]
    fn single_mode() {
        let e = EigenExpansion::interval(0.0, PI, 1.0, &|x| x.sin(), 8).unwrap();
        assert!((dirichlet_exact(&e, 0.5, &[PI / 2.0]) - (-0.5f64).exp()).abs() < 1e-13);
        assert_eq!(dirichlet_exact(&e, 0.5, &[0.0]), 0.0);
        assert!(e.reconstruction_error() < 1e-12);
        assert!(e.tail_bound(0.25) < 1e-10);
    }

    #[test]
    fn two_dimensional_box() {
        let f = |x: &[f64]| x[0].sin() * (2.0 * x[1]).sin();
        let e = EigenExpansion::boxed(vec![0.0, 0.0], vec![PI, PI], 1.0, &f, 3).unwrap();
        let v = dirichlet_exact(&e, 0.1, &[1.0, 0.4]);
        assert!((v - (-0.5f64).exp() * f(&[1.0, 0.4])).abs() < 1e-11);
    }
}
