//! Subordinated approximants
//! `f_n(t, x) = int_0^inf [F(tau/n)^n f0](x) p^mu(t, tau) dtau`
//! and their subordinate-semigroup analogue `int [F(s/n)^n f0](x) eta_t(ds)`.

use serde::{Deserialize, Serialize};

use super::inverse::{sample_inverse_subordinator, truncation_radius, DensityBudget, PassageSample};
use super::stable::SubordinatorLaw;
use super::SubordinationMeasure;
use crate::chernoff::ChernoffStep;
use crate::error::{Error, Result};
use crate::feynman::{batch_means, final_value, run_unit, ChainKernel, MCSpec};
use crate::field::{Backend, FieldMeta, SolutionField};
use crate::model::Problem;
use crate::quadrature::{GaussLegendre, Table1d};
use crate::rng::substream;

const TAU_DRAW: u64 = 0x7a0_d4a3;
const TAU_NODE: u64 = 0x7a0_0de5;
const SUB_DRAW: u64 = 0x50b_d4a3;

/// How the outer `tau` integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauSpec {
    /// Quadrature when the density is closed-form, Monte Carlo otherwise.
    #[default]
    Auto,
    /// Gauss–Legendre on `[0, R]` with `P(E_t > R) < eps`.
    Quadrature { nodes: usize, eps: f64 },
    /// `tau ~ E^mu_t`, one fresh chain per draw.
    MonteCarlo,
}

impl TauSpec {
    pub const DEFAULT_NODES: usize = 48;
    pub const DEFAULT_EPS: f64 = 1e-10;

    fn resolve(self, mu: &SubordinationMeasure) -> Result<Self> {
        match self {
            Self::Auto if mu.half_weight().is_some() => Ok(Self::Quadrature {
                nodes: Self::DEFAULT_NODES,
                eps: Self::DEFAULT_EPS,
            }),
            Self::Auto => Ok(Self::MonteCarlo),
            Self::Quadrature { .. } if mu.half_weight().is_none() => Err(Error::invalid(
                "tau quadrature needs the closed-form density (mu = w delta_1/2); use monte_carlo",
            )),
            Self::Quadrature { nodes, eps } if nodes == 0 || !(eps > 0.0 && eps < 1.0) => {
                Err(Error::invalid("tau quadrature needs nodes >= 1 and eps in (0, 1)"))
            }
            s => Ok(s),
        }
    }
}

/// Discretized law of `E^mu_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TimeMixture {
    /// Quadrature nodes and weights against `p^mu(t, .)`.
    Weighted { tau_nodes: Vec<f64>, tau_weights: Vec<f64> },
    /// Draws of `E^mu_t`.
    Sampled { tau_samples: Vec<f64> },
}

impl TimeMixture {
    /// Gauss–Legendre nodes on `[0, R_{t, eps}]` weighted by the closed-form
    /// density.
    pub fn quadrature(mu: &SubordinationMeasure, t: f64, nodes: usize, eps: f64) -> Result<Self> {
        let w = mu
            .half_weight()
            .ok_or_else(|| Error::invalid("closed-form density needs mu = w delta_1/2"))?;
        let r = truncation_radius(mu, t, eps, &DensityBudget::default())?;
        let gl = GaussLegendre::cached(nodes);
        let (tau_nodes, tau_weights) = gl
            .mapped(0.0, r)
            .map(|(tau, q)| {
                let p = w / (std::f64::consts::PI * t).sqrt() * (-(w * tau).powi(2) / (4.0 * t)).exp();
                (tau, q * p)
            })
            .unzip();
        Ok(Self::Weighted { tau_nodes, tau_weights })
    }

    pub fn sampled(mu: &SubordinationMeasure, t: f64, samples: usize, seed: u64) -> Self {
        let tau_samples = (0..samples)
            .map(|i| sample_inverse_subordinator(mu, t, &mut substream(seed, &[TAU_DRAW, i as u64])))
            .collect();
        Self::Sampled { tau_samples }
    }

    /// Mass captured by the discretization (1 for samples).
    pub fn mass(&self) -> f64 {
        match self {
            Self::Weighted { tau_weights, .. } => tau_weights.iter().sum(),
            Self::Sampled { .. } => 1.0,
        }
    }
}

/// Step used for a problem: whole space, or hard kill (`Theta_n`) on `G`.
pub fn problem_step(problem: &Problem) -> Result<ChernoffStep> {
    match &problem.domain {
        None => Ok(ChernoffStep::whole_space(problem.coeffs.clone())),
        Some(g) => ChernoffStep::hard_kill(problem.coeffs.clone(), g.clone()),
    }
}

fn at_time_zero(step: &ChernoffStep, f0: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
    match step.domain() {
        Some(g) if !g.contains(x) => 0.0,
        _ => f0(x),
    }
}

/// `f_n(t, x)` at `t = problem.horizon`, with combined error estimates
/// (Monte Carlo standard error, plus the truncated density mass times the
/// largest inner value for the quadrature form).
pub fn subordinated_solution(
    problem: &Problem,
    n: usize,
    points: &[Vec<f64>],
    mc: &MCSpec,
    tau: TauSpec,
) -> Result<SolutionField> {
    let mu = problem
        .fractional
        .as_ref()
        .ok_or_else(|| Error::invalid("problem has no subordination measure"))?;
    let step = problem_step(problem)?;
    let f0 = |x: &[f64]| problem.initial_value(x);
    subordinated_with_step(&step, mu, n, problem.horizon, &f0, points, mc, tau)
}

/// [`subordinated_solution`] for an explicit step and time.
#[allow(clippy::too_many_arguments)]
pub fn subordinated_with_step(
    step: &ChernoffStep,
    mu: &SubordinationMeasure,
    n: usize,
    t: f64,
    f0: &(dyn Fn(&[f64]) -> f64 + Sync),
    points: &[Vec<f64>],
    mc: &MCSpec,
    tau: TauSpec,
) -> Result<SolutionField> {
    mc.validate()?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    let mut meta = FieldMeta {
        t,
        n,
        samples: mc.chains(),
        seed: Some(mc.seed),
        backend: Backend::Mc,
    };
    if t == 0.0 {
        return Ok(SolutionField {
            points: points.to_vec(),
            values: points.iter().map(|p| at_time_zero(step, f0, p)).collect(),
            stderr: vec![0.0; points.len()],
            meta,
        });
    }
    if !(t > 0.0) {
        return Err(Error::invalid(format!("t must be >= 0, got {t}")));
    }
    let fin = final_value(step, f0)?;
    let mut values = Vec::with_capacity(points.len());
    let mut stderr = Vec::with_capacity(points.len());
    match tau.resolve(mu)? {
        TauSpec::Quadrature { nodes, eps } => {
            let TimeMixture::Weighted { tau_nodes, tau_weights } = TimeMixture::quadrature(mu, t, nodes, eps)? else {
                unreachable!()
            };
            meta.samples = mc.chains() * nodes;
            for p in points {
                let (mut v, mut var, mut sup) = (0.0, 0.0, 0.0f64);
                for (j, (&tj, &wj)) in tau_nodes.iter().zip(&tau_weights).enumerate() {
                    let h = tj / n as f64;
                    let stats = batch_means(mc.units(), mc.batches, 1, |u, out| {
                        let mut k = [ChainKernel::new(step, h)?];
                        let rng = substream(mc.seed, &[TAU_NODE, j as u64, u as u64]);
                        run_unit(&mut k, &[&*fin], n, p, rng, mc.antithetic, out)
                    })?;
                    v += wj * stats[0].0;
                    sup = sup.max(stats[0].0.abs() + stats[0].1);
                    var += (wj * stats[0].1).powi(2);
                }
                values.push(v);
                // the tail beyond R carries mass eps of values bounded like the inner ones
                stderr.push(var.sqrt() + eps * sup);
            }
        }
        TauSpec::MonteCarlo => {
            for p in points {
                let stats = batch_means(mc.units(), mc.batches, 1, |u, out| {
                    let tau = sample_inverse_subordinator(mu, t, &mut substream(mc.seed, &[TAU_DRAW, u as u64]));
                    mix_unit(step, n, tau, &*fin, f0, p, mc, u, out)
                })?;
                values.push(stats[0].0);
                stderr.push(stats[0].1);
            }
        }
        TauSpec::Auto => unreachable!(),
    }
    Ok(SolutionField {
        points: points.to_vec(),
        values,
        stderr,
        meta,
    })
}

/// One unit of a mixture: chains of `n` steps of size `s/n` from `x`,
/// driven by the chain substream `u` (shared with [`crate::feynman`]).
#[allow(clippy::too_many_arguments)]
fn mix_unit(
    step: &ChernoffStep,
    n: usize,
    s: f64,
    fin: &(dyn Fn(&[f64]) -> f64 + Sync),
    f0: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    mc: &MCSpec,
    u: usize,
    out: &mut [f64],
) -> Result<()> {
    if s <= 0.0 {
        out[0] = at_time_zero(step, f0, x);
        return Ok(());
    }
    let mut k = [ChainKernel::new(step, s / n as f64)?];
    let rng = substream(mc.seed, &[u as u64]);
    run_unit(&mut k, &[fin], n, x, rng, mc.antithetic, out)
}

/// `int [F(s/n)^n f0](x) eta_t(ds)` for a subordinator law `eta_t`, by Monte
/// Carlo over `s`. The chain random numbers are those of
/// [`crate::feynman::feynman_estimate`] with the same seed, so a point-mass
/// law `delta_{ct}` reproduces `F(ct/n)^n f0` exactly.
#[allow(clippy::too_many_arguments)]
pub fn subordinate_semigroup(
    step: &ChernoffStep,
    law: &SubordinatorLaw,
    n: usize,
    t: f64,
    f0: &(dyn Fn(&[f64]) -> f64 + Sync),
    points: &[Vec<f64>],
    mc: &MCSpec,
) -> Result<SolutionField> {
    mc.validate()?;
    law.validate()?;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("t must be >= 0, got {t}")));
    }
    let fin = final_value(step, f0)?;
    let mut values = Vec::with_capacity(points.len());
    let mut stderr = Vec::with_capacity(points.len());
    for p in points {
        let stats = batch_means(mc.units(), mc.batches, 1, |u, out| {
            let s = law.sample(t, &mut substream(mc.seed, &[SUB_DRAW, u as u64]));
            mix_unit(step, n, s, &*fin, f0, p, mc, u, out)
        })?;
        values.push(stats[0].0);
        stderr.push(stats[0].1);
    }
    Ok(SolutionField {
        points: points.to_vec(),
        values,
        stderr,
        meta: FieldMeta {
            t,
            n,
            samples: mc.chains(),
            seed: Some(mc.seed),
            backend: Backend::Mc,
        },
    })
}

/// `f_n(t, x)` along a list of times at one point, cheaply: the inner
/// estimates `u(tau) = [F(tau/n)^n f0](x)` are computed once on a table of
/// `tau` nodes with common random numbers (so `u` is smooth in `tau`), then
/// mixed against the law of `E^mu_t` for each `t` — by quadrature of the
/// closed-form density, or over one shared sample of first-passage times.
/// Returns `(value, error)` pairs; the error bounds the correlated inner
/// standard errors by their weighted sum.
pub fn subordinated_time_series(
    problem: &Problem,
    n: usize,
    x: &[f64],
    times: &[f64],
    mc: &MCSpec,
    table_nodes: usize,
) -> Result<Vec<(f64, f64)>> {
    mc.validate()?;
    let mu = problem
        .fractional
        .as_ref()
        .ok_or_else(|| Error::invalid("problem has no subordination measure"))?;
    if table_nodes < 4 {
        return Err(Error::invalid("tau table needs at least 4 nodes"));
    }
    let step = problem_step(problem)?;
    let f0 = |y: &[f64]| problem.initial_value(y);
    let fin = final_value(&step, &f0)?;
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let eps = 1e-9;
    let sample = match mu.half_weight() {
        Some(_) => None,
        None => Some(PassageSample::draw(mu, mc.samples.max(10_000), mc.seed)),
    };
    let r = match &sample {
        None => truncation_radius(mu, t_max, eps, &DensityBudget::default())?,
        Some(s) => s.passage_times(t_max).into_iter().fold(0.0, f64::max),
    };
    // table on [0, r], with the left end included
    let gl = GaussLegendre::cached(table_nodes);
    let mut taus = vec![0.0];
    taus.extend(gl.mapped(0.0, r).map(|(x, _)| x));
    taus.push(r);
    let mut u_vals = Vec::with_capacity(taus.len());
    let mut u_err = Vec::with_capacity(taus.len());
    for &tau in &taus {
        if tau == 0.0 {
            u_vals.push(at_time_zero(&step, &f0, x));
            u_err.push(0.0);
            continue;
        }
        let h = tau / n as f64;
        let stats = batch_means(mc.units(), mc.batches, 1, |u, out| {
            let mut k = [ChainKernel::new(&step, h)?];
            run_unit(&mut k, &[&*fin], n, x, substream(mc.seed, &[u as u64]), mc.antithetic, out)
        })?;
        u_vals.push(stats[0].0);
        u_err.push(stats[0].1);
    }
    let u_tab = Table1d::new(taus.clone(), u_vals, 3);
    let e_tab = Table1d::new(taus, u_err, 1);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t <= 0.0 {
            out.push((at_time_zero(&step, &f0, x), 0.0));
            continue;
        }
        let (v, e) = match (&sample, mu.half_weight()) {
            (None, Some(w)) => {
                let rt = truncation_radius(mu, t, eps, &DensityBudget::default())?.min(r);
                let q = GaussLegendre::cached(64);
                q.mapped(0.0, rt).fold((0.0, 0.0), |(v, e), (tau, wq)| {
                    let p = w / (std::f64::consts::PI * t).sqrt() * (-(w * tau).powi(2) / (4.0 * t)).exp();
                    (v + wq * p * u_tab.eval(tau), e + wq * p * e_tab.eval(tau))
                })
            }
            (Some(s), _) => {
                let es = s.passage_times(t);
                let m = es.len() as f64;
                let vals: Vec<f64> = es.iter().map(|&tau| u_tab.eval(tau.min(r))).collect();
                let mean = vals.iter().sum::<f64>() / m;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
                let inner = es.iter().map(|&tau| e_tab.eval(tau.min(r))).sum::<f64>() / m;
                (mean, inner + (var / m).sqrt())
            }
            _ => unreachable!(),
        };
        out.push((v, e));
    }
    Ok(out)
}
