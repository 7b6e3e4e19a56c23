//! Independent references for the evaluators: closed-form heat solutions,
//! Dirichlet eigenfunction expansions, brute-force quadrature of
//! subordination integrals, and PDE residuals of tabulated solutions.
//!
//! Nothing here calls into the evaluators' own quadrature, kernels or
//! special functions.

mod exact;
mod quad;
mod residual;

use std::f64::consts::PI;

pub use exact::{dirichlet_exact, erfc_series, heat_exact, heat_exact_with, EigenExpansion, GaussianData};
pub use quad::{adaptive_gk, tanh_sinh};
pub use residual::{generator_residual, ResidualReport, SpaceTimeField};

use crate::error::{Error, Result};
use crate::fractional::SubordinationMeasure;

/// `p(t, tau) = w (pi t)^{-1/2} exp(-(w tau)^2 / (4t))`, the density of the
/// inverse subordinator for `mu = w delta_{1/2}`.
pub fn half_density(w: f64, t: f64, tau: f64) -> f64 {
    w / (PI * t).sqrt() * (-(w * tau).powi(2) / (4.0 * t)).exp()
}

/// Radius beyond which the `w delta_{1/2}` density carries mass below `eps`:
/// `2 sqrt(t) r / w` with `erfc(r) = eps`, solved by bisection.
pub fn half_radius(w: f64, t: f64, eps: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erfc_series(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * t.sqrt() * hi / w
}

/// `int_0^inf inner(tau) p^mu(t, tau) dtau` by adaptive Gauss–Kronrod on
/// `[0, R]`, for `mu = w delta_{1/2}`. The radius drops a density mass of
/// `quad_tol / 100`, so `inner` is assumed bounded by 100 there.
pub fn subordinated_oracle(
    inner: &dyn Fn(f64) -> f64,
    mu: &SubordinationMeasure,
    t: f64,
    quad_tol: f64,
) -> Result<f64> {
    let w = mu
        .half_weight()
        .ok_or_else(|| Error::invalid("the subordination oracle has a closed-form density only for w delta_1/2"))?;
    if t == 0.0 {
        return Ok(inner(0.0));
    }
    let r = half_radius(w, t, quad_tol * 1e-2);
    subordinated_oracle_density(inner, &|tau| half_density(w, t, tau), r, quad_tol)
}

/// `int_0^R inner(tau) density(tau) dtau` for a tabulated or user density.
pub fn subordinated_oracle_density(
    inner: &dyn Fn(f64) -> f64,
    density: &dyn Fn(f64) -> f64,
    radius: f64,
    quad_tol: f64,
) -> Result<f64> {
    let (v, err) = adaptive_gk(&|tau| inner(tau) * density(tau), 0.0, radius, quad_tol)?;
    if err > quad_tol {
        return Err(Error::ToleranceNotMet { estimate: err, tol: quad_tol });
    }
    Ok(v)
}
