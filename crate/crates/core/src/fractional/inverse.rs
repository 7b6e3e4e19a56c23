//! The inverse subordinator `E_t = inf { tau : D_tau > t }` of the mixture
//! subordinator `D_tau = sum_i w_i^{1/beta_i} D^{beta_i}_tau`.
//!
//! Everything here rests on the first-passage identity
//! `P(E_t > tau) = P(D_tau < t)`. For a fixed vector of standard stable draws
//! `X_i`, `g(tau) = sum_i (w_i tau)^{1/beta_i} X_i` is increasing in `tau`
//! and has, at every fixed `tau`, the law of `D_tau`; so the root of
//! `g(tau) = t` has exactly the law of `E_t`, and the events
//! `{g(tau) < t}` give a coupled Monte Carlo CDF across `tau` and `t`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use super::stable::sample_stable;
use super::SubordinationMeasure;
use crate::error::{Error, Result};
use crate::rng::substream;

/// Monte Carlo budget for the non-closed-form density and tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBudget {
    pub samples: usize,
    pub seed: u64,
    /// Half-width of the central difference, relative to `max(tau, t^{beta_min})`.
    pub rel_step: f64,
    /// Largest acceptable standard error of a density value.
    pub tol: f64,
}

impl Default for DensityBudget {
    fn default() -> Self {
        Self {
            samples: 200_000,
            seed: 0x5eed,
            rel_step: 0.05,
            tol: 1e-2,
        }
    }
}

/// `(beta_i, w_i^{1/beta_i} X_i)` for one draw of the stable vector; the
/// second entry multiplies `tau^{1/beta_i}`.
fn draw_components<R: Rng + ?Sized>(mu: &SubordinationMeasure, rng: &mut R, out: &mut Vec<(f64, f64)>) {
    out.clear();
    for &(b, w) in mu.atoms() {
        out.push((1.0 / b, w.powf(1.0 / b) * sample_stable(b, rng)));
    }
}

fn path_value(comps: &[(f64, f64)], tau: f64) -> f64 {
    comps.iter().map(|&(p, c)| c * tau.powf(p)).sum()
}

/// Root of `path_value(tau) = t`.
fn first_passage(comps: &[(f64, f64)], t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while path_value(comps, hi) < t {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if path_value(comps, mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// One draw of `E^mu_t`. For `mu = w delta_{1/2}` this is `|xi| sqrt(2t) / w`;
/// otherwise the root of `sum_i (w_i tau)^{1/beta_i} X_i = t` for a fresh
/// stable vector `X`.
pub fn sample_inverse_subordinator<R: Rng + ?Sized>(mu: &SubordinationMeasure, t: f64, rng: &mut R) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if let Some(w) = mu.half_weight() {
        let xi: f64 = rng.sample(StandardNormal);
        return xi.abs() * (2.0 * t).sqrt() / w;
    }
    let mut comps = Vec::with_capacity(mu.atoms().len());
    draw_components(mu, rng, &mut comps);
    first_passage(&comps, t)
}

/// A reusable sample of stable vectors for coupled tail/CDF queries.
pub struct PassageSample {
    comps: Vec<Vec<(f64, f64)>>,
}

impl PassageSample {
    pub fn draw(mu: &SubordinationMeasure, samples: usize, seed: u64) -> Self {
        let mut rng = substream(seed, &[0x7a11]);
        let comps = (0..samples)
            .map(|_| {
                let mut c = Vec::new();
                draw_components(mu, &mut rng, &mut c);
                c
            })
            .collect();
        Self { comps }
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    /// Empirical `P(D_tau < t) = P(E_t > tau)`.
    pub fn tail(&self, t: f64, tau: f64) -> f64 {
        if tau <= 0.0 {
            return if t > 0.0 { 1.0 } else { 0.0 };
        }
        let hits = self.comps.iter().filter(|c| path_value(c, tau) < t).count();
        hits as f64 / self.len() as f64
    }

    /// First-passage times `E_t`, one per stored vector.
    pub fn passage_times(&self, t: f64) -> Vec<f64> {
        self.comps.iter().map(|c| first_passage(c, t)).collect()
    }
}

/// Density `p^mu(t, tau)` of `E^mu_t`.
///
/// Closed form for `mu = w delta_{1/2}`: `w (pi t)^{-1/2} exp(-(w tau)^2 / (4t))`.
/// Otherwise `-d/dtau P(D_tau <= t)`, by a central difference of the Monte
/// Carlo CDF on one shared sample; fails with `InsufficientBudget` when the
/// standard error exceeds `budget.tol`.
pub fn inverse_subordinator_density(
    mu: &SubordinationMeasure,
    t: f64,
    tau: f64,
    budget: &DensityBudget,
) -> Result<f64> {
    if !(t > 0.0) || !(tau >= 0.0) {
        return Err(Error::invalid(format!("density needs t > 0 and tau >= 0, got t = {t}, tau = {tau}")));
    }
    if let Some(w) = mu.half_weight() {
        return Ok(half_density(w, t, tau));
    }
    let sample = PassageSample::draw(mu, budget.samples, budget.seed);
    density_from_sample(&sample, mu, t, tau, budget)
}

fn half_density(w: f64, t: f64, tau: f64) -> f64 {
    w / (std::f64::consts::PI * t).sqrt() * (-(w * tau).powi(2) / (4.0 * t)).exp()
}

pub(crate) fn density_from_sample(
    sample: &PassageSample,
    mu: &SubordinationMeasure,
    t: f64,
    tau: f64,
    budget: &DensityBudget,
) -> Result<f64> {
    let beta_min = mu.atoms().iter().map(|a| a.0).fold(1.0, f64::min);
    let h = budget.rel_step * tau.max(t.powf(beta_min));
    let (lo, hi) = ((tau - h).max(0.0), tau + h);
    let n = sample.len() as f64;
    // P(lo < E_t <= hi) on the shared sample
    let p = sample.tail(t, lo) - sample.tail(t, hi);
    let width = hi - lo;
    let density = p / width;
    let stderr = (p * (1.0 - p) / n).sqrt() / width;
    if stderr > budget.tol || (p == 0.0 && 1.0 / (n * width) > budget.tol) {
        return Err(Error::InsufficientBudget {
            stderr: stderr.max(1.0 / (n * width)),
            tol: budget.tol,
        });
    }
    Ok(density)
}

/// `P(E^mu_t > tau)` with a standard error (0 for the closed form).
pub fn inverse_subordinator_tail(
    mu: &SubordinationMeasure,
    t: f64,
    tau: f64,
    budget: &DensityBudget,
) -> (f64, f64) {
    if let Some(w) = mu.half_weight() {
        return (erfc(w * tau / (2.0 * t.sqrt())), 0.0);
    }
    let sample = PassageSample::draw(mu, budget.samples, budget.seed);
    let p = sample.tail(t, tau);
    (p, (p * (1.0 - p) / sample.len() as f64).sqrt())
}

/// Radius `R` with `P(E^mu_T > R) < eps`; by monotonicity of the tail in
/// `t` it serves every `t <= T`. Closed form for `w delta_{1/2}`,
/// `R = 2 sqrt(T) erfc^{-1}(eps) / w`; otherwise a doubling-then-bisection
/// search on the Monte Carlo tail, accepting `R` only when the upper
/// 3-sigma bound of the tail is below `eps`.
pub fn truncation_radius(mu: &SubordinationMeasure, horizon: f64, eps: f64, budget: &DensityBudget) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    if eps >= 1.0 || horizon <= 0.0 {
        return Ok(0.0);
    }
    if let Some(w) = mu.half_weight() {
        return Ok(2.0 * horizon.sqrt() * erfc_inv(eps) / w);
    }
    let n = budget.samples as f64;
    // an empty tail is only evidence for eps above a few / n
    if eps * n < 30.0 {
        return Err(Error::InsufficientBudget {
            stderr: 1.0 / n,
            tol: eps,
        });
    }
    let sample = PassageSample::draw(mu, budget.samples, budget.seed);
    let ok = |r: f64| {
        let p = sample.tail(horizon, r);
        p + 3.0 * (p * (1.0 - p) / n).sqrt() < eps
    };
    let mut hi = horizon.max(1.0);
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InsufficientBudget { stderr: 1.0 / n, tol: eps });
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
