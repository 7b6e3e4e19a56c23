//! Monte Carlo evaluation of the Feynman formulae.
//!
//! The `n`-fold iterated integral of step kernels is the expectation over a
//! chain `x_k = x_{k-1} - h B(x_{k-1}) - z_k + N(0, 2 h A(x_{k-1}))`, `h = t/n`,
//! `z_k ~ eta_h`, weighted by `exp(-h sum_k C(x_{k-1}))`. The killed variants:
//!
//! * hard kill (`Theta_n`): the integration region is `G^n`, so a chain dies as
//!   soon as one of `x_1..x_n` leaves `G`. Only the discrete skeleton is
//!   checked; there is no continuous-path exit correction.
//! * soft cutoff: weight `prod_k cutoff(h, x_{k-1})` and final value
//!   `E(f0)(x_n)`, the iterated-integral form of `F_o(h)^n f0`.
//!
//! Every chain draws from its own counter-based substream keyed by
//! `(seed, chain index)`, so estimates are bitwise reproducible regardless
//! of thread count, and distinct evaluation points share random numbers.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chernoff::{ChernoffStep, StepMode};
use crate::error::{Error, Result};
use crate::field::{Backend, FieldMeta, SolutionField};
use crate::linalg;
use crate::model::{extend, Domain, EtaSampler, Problem};
use crate::rng::{substream, StreamRng};

/// Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCSpec {
    pub samples: usize,
    pub seed: u64,
    /// Pair each chain with its mirror image (negated Gaussian increments).
    #[serde(default)]
    pub antithetic: bool,
    /// Number of batches for the batch-means standard error.
    #[serde(default = "default_batches")]
    pub batches: usize,
}

fn default_batches() -> usize {
    32
}

impl Default for MCSpec {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            antithetic: false,
            batches: default_batches(),
        }
    }
}

impl MCSpec {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        if self.batches == 0 {
            return Err(Error::invalid("batches must be at least 1"));
        }
        Ok(())
    }

    /// Independent units: chains, or chain pairs when antithetic.
    pub(crate) fn units(&self) -> usize {
        if self.antithetic {
            self.samples.div_ceil(2)
        } else {
            self.samples
        }
    }

    /// Chains actually simulated.
    pub(crate) fn chains(&self) -> usize {
        if self.antithetic {
            2 * self.units()
        } else {
            self.samples
        }
    }
}

/// One realization of the chain, with its full path.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedChain {
    pub positions: Vec<Vec<f64>>,
    pub jumps: Vec<Vec<f64>>,
    pub weight: f64,
    pub alive: bool,
}

impl WeightedChain {
    pub fn end(&self) -> &[f64] {
        self.positions.last().expect("chain has x0")
    }

    /// `weight * f0(x_n)`, or 0 for a dead chain.
    pub fn contribution(&self, f0: &dyn Fn(&[f64]) -> f64) -> f64 {
        if self.alive && self.weight != 0.0 {
            self.weight * f0(self.end())
        } else {
            0.0
        }
    }
}

/// Per-step constants of a chain with step size `h`, plus scratch space.
pub(crate) struct ChainKernel<'a> {
    step: &'a ChernoffStep,
    h: f64,
    d: usize,
    /// Cholesky factor of `2 h A` when `A` is constant.
    fixed_l: Option<Vec<f64>>,
    eta: Option<EtaSampler<'a>>,
    a: Vec<f64>,
    b: Vec<f64>,
    xi: Vec<f64>,
    z: Vec<f64>,
    noise: Vec<f64>,
    pub(crate) x: Vec<f64>,
}

impl<'a> ChainKernel<'a> {
    pub(crate) fn new(step: &'a ChernoffStep, h: f64) -> Result<Self> {
        let d = step.dim();
        let coeffs = step.coeffs();
        let fixed_l = if coeffs.has_constant_diffusion() {
            let mut a = vec![0.0; d * d];
            let origin = vec![0.0; d];
            coeffs.diffusion_at(&origin, &mut a);
            a.iter_mut().for_each(|v| *v *= 2.0 * h);
            Some(linalg::cholesky(&a, d, &origin)?)
        } else {
            None
        };
        Ok(Self {
            step,
            h,
            d,
            fixed_l,
            eta: coeffs.jump().map(|j| j.eta(h)),
            a: vec![0.0; d * d],
            b: vec![0.0; d],
            xi: vec![0.0; d],
            z: vec![0.0; d],
            noise: vec![0.0; d],
            x: vec![0.0; d],
        })
    }

    /// Runs `n` steps from `x0`; the end point is left in `self.x`. Returns
    /// the chain weight, 0 for a killed chain. `sign = -1` mirrors the
    /// Gaussian increments.
    pub(crate) fn run(
        &mut self,
        n: usize,
        x0: &[f64],
        rng: &mut StreamRng,
        sign: f64,
        mut record: Option<&mut WeightedChain>,
    ) -> Result<f64> {
        let step = self.step;
        let coeffs = step.coeffs();
        let domain = step.domain();
        let (hard, soft) = match step.mode() {
            StepMode::HardKill => (domain, None),
            StepMode::SoftCutoff => (None, domain),
            StepMode::WholeSpace => (None, None),
        };
        let d = self.d;
        let h = self.h;
        self.x.copy_from_slice(x0);
        if let Some(g) = hard {
            if !g.contains(x0) {
                return Ok(0.0);
            }
        }
        let mut cutoff = 1.0;
        let mut c_sum = 0.0;
        for _ in 0..n {
            if let Some(g) = soft {
                cutoff *= g.cutoff(h, &self.x);
                if cutoff == 0.0 {
                    return Ok(0.0);
                }
            }
            c_sum += coeffs.killing_at(&self.x);
            coeffs.drift_at(&self.x, &mut self.b);
            for v in self.xi.iter_mut() {
                *v = sign * rng.sample::<f64, _>(StandardNormal);
            }
            match &self.fixed_l {
                Some(l) => linalg::lower_mul(l, d, &self.xi, &mut self.noise),
                None => {
                    coeffs.diffusion_at(&self.x, &mut self.a);
                    self.a.iter_mut().for_each(|v| *v *= 2.0 * h);
                    let l = linalg::cholesky(&self.a, d, &self.x)?;
                    linalg::lower_mul(&l, d, &self.xi, &mut self.noise);
                }
            }
            match &self.eta {
                Some(eta) => eta.sample(rng, &mut self.z),
                None => self.z.iter_mut().for_each(|v| *v = 0.0),
            }
            for i in 0..d {
                self.x[i] += -h * self.b[i] - self.z[i] + self.noise[i];
            }
            if let Some(rec) = record.as_deref_mut() {
                rec.positions.push(self.x.clone());
                rec.jumps.push(self.z.clone());
            }
            if let Some(g) = hard {
                if !g.contains(&self.x) {
                    return Ok(0.0);
                }
            }
        }
        Ok(cutoff * (-h * c_sum).exp())
    }
}

/// Samples one chain of `n` steps of size `t/n` from `x0`, keeping the path.
pub fn sample_chain(
    step: &ChernoffStep,
    n: usize,
    t: f64,
    x0: &[f64],
    rng: &mut StreamRng,
) -> Result<WeightedChain> {
    check_args(step, n, t)?;
    if x0.len() != step.dim() {
        return Err(Error::DimensionMismatch {
            expected: step.dim(),
            got: x0.len(),
        });
    }
    let mut chain = WeightedChain {
        positions: vec![x0.to_vec()],
        jumps: Vec::with_capacity(n),
        weight: 0.0,
        alive: true,
    };
    let mut kernel = ChainKernel::new(step, t / n as f64)?;
    let w = kernel.run(n, x0, rng, 1.0, Some(&mut chain))?;
    chain.weight = w;
    chain.alive = w > 0.0 || !matches!(step.mode(), StepMode::HardKill | StepMode::SoftCutoff);
    Ok(chain)
}

fn check_args(step: &ChernoffStep, n: usize, t: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("t must be positive, got {t}")));
    }
    if step.dim() == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    Ok(())
}

/// Mean and batch-means standard error of `k` statistics over `units`
/// independent units. Batches are contiguous unit ranges, evaluated in
/// parallel and reduced in batch order.
pub(crate) fn batch_means<F>(units: usize, batches: usize, k: usize, eval: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
{
    let nb = batches.min(units).max(1);
    let sums: Vec<Vec<f64>> = (0..nb)
        .into_par_iter()
        .map(|b| {
            let (lo, hi) = (b * units / nb, (b + 1) * units / nb);
            let mut acc = vec![0.0; k];
            let mut out = vec![0.0; k];
            for u in lo..hi {
                eval(u, &mut out)?;
                for (a, o) in acc.iter_mut().zip(&out) {
                    *a += o;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut stats = Vec::with_capacity(k);
    for j in 0..k {
        let total: f64 = sums.iter().map(|s| s[j]).sum();
        let mean = total / units as f64;
        let se = if nb < 2 {
            f64::NAN
        } else {
            let var: f64 = sums
                .iter()
                .enumerate()
                .map(|(b, s)| {
                    let size = ((b + 1) * units / nb - b * units / nb) as f64;
                    (s[j] / size - mean).powi(2)
                })
                .sum::<f64>()
                / (nb - 1) as f64;
            (var / nb as f64).sqrt()
        };
        stats.push((mean, se));
    }
    Ok(stats)
}

/// Runs one unit (a chain, or an antithetic pair) and writes
/// `weight * g(x_n)` for each final-value function `g`.
pub(crate) fn run_unit(
    kernels: &mut [ChainKernel<'_>],
    finals: &[&(dyn Fn(&[f64]) -> f64 + Sync)],
    n: usize,
    x0: &[f64],
    mut rng: StreamRng,
    antithetic: bool,
    out: &mut [f64],
) -> Result<()> {
    out.iter_mut().for_each(|v| *v = 0.0);
    let signs: &[f64] = if antithetic { &[1.0, -1.0] } else { &[1.0] };
    let start = rng.clone();
    for &sign in signs {
        for (j, kernel) in kernels.iter_mut().enumerate() {
            // every kernel replays the same random numbers
            rng.clone_from(&start);
            let w = kernel.run(n, x0, &mut rng, sign, None)?;
            if w != 0.0 {
                out[j] += w * finals[j](&kernel.x);
            }
        }
    }
    let m = signs.len() as f64;
    out.iter_mut().for_each(|v| *v /= m);
    Ok(())
}

/// Final-value function for a step: `E(f0)` in soft mode, `f0` otherwise.
pub(crate) fn final_value<'a>(
    step: &'a ChernoffStep,
    f0: &'a (dyn Fn(&[f64]) -> f64 + Sync),
) -> Result<Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>> {
    Ok(match (step.mode(), step.domain()) {
        (StepMode::SoftCutoff, Some(g)) => {
            let ext = extend(g, f0, step.extension_delta())?;
            Box::new(move |x: &[f64]| ext.eval(x))
        }
        _ => Box::new(f0),
    })
}

/// Value at `t = 0`: `f0(x0)`, restricted to `G` in killed modes.
fn at_time_zero(step: &ChernoffStep, f0: &dyn Fn(&[f64]) -> f64, x0: &[f64]) -> f64 {
    match step.domain() {
        Some(g) if !g.contains(x0) => 0.0,
        _ => f0(x0),
    }
}

/// Monte Carlo estimate of `[F(t/n)]^n f0` (or its killed variants) at
/// each point, with batch-means standard errors.
pub fn feynman_estimate(
    step: &ChernoffStep,
    n: usize,
    t: f64,
    f0: &(dyn Fn(&[f64]) -> f64 + Sync),
    points: &[Vec<f64>],
    mc: &MCSpec,
) -> Result<SolutionField> {
    mc.validate()?;
    let meta = FieldMeta {
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
    check_args(step, n, t)?;
    let fin = final_value(step, f0)?;
    let h = t / n as f64;
    let mut values = Vec::with_capacity(points.len());
    let mut stderr = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != step.dim() {
            return Err(Error::DimensionMismatch {
                expected: step.dim(),
                got: p.len(),
            });
        }
        let stats = batch_means(mc.units(), mc.batches, 1, |u, out| {
            let mut kernels = [ChainKernel::new(step, h)?];
            let rng = substream(mc.seed, &[u as u64]);
            run_unit(&mut kernels, &[&*fin], n, p, rng, mc.antithetic, out)
        })?;
        values.push(stats[0].0);
        stderr.push(stats[0].1);
    }
    Ok(SolutionField {
        points: points.to_vec(),
        values,
        stderr,
        meta,
    })
}

/// Soft-cutoff and hard-kill estimates at one point, on shared chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparePoint {
    pub x: Vec<f64>,
    pub soft: f64,
    pub soft_stderr: f64,
    pub hard: f64,
    pub hard_stderr: f64,
    /// `soft - hard`.
    pub gap: f64,
    /// `sqrt(soft_stderr^2 + hard_stderr^2)`.
    pub combined_stderr: f64,
    /// Standard error of the per-chain difference (same random numbers).
    pub paired_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub n: usize,
    pub t: f64,
    pub samples: usize,
    pub seed: u64,
    pub points: Vec<ComparePoint>,
}

impl CompareReport {
    pub fn max_gap(&self) -> f64 {
        self.points.iter().fold(0.0, |m, p| m.max(p.gap.abs()))
    }
}

/// Runs the soft-cutoff (`F_o^n`) and hard-kill (`Theta_n`) estimators of a
/// killed problem on identical chains and reports their discrepancy.
pub fn soft_vs_hard_compare(
    problem: &Problem,
    n: usize,
    t: f64,
    points: &[Vec<f64>],
    mc: &MCSpec,
) -> Result<CompareReport> {
    mc.validate()?;
    let domain: &Domain = problem
        .domain
        .as_ref()
        .ok_or_else(|| Error::invalid("soft/hard comparison needs a domain"))?;
    check_args(&ChernoffStep::whole_space(problem.coeffs.clone()), n, t)?;
    let soft = ChernoffStep::soft_cutoff(problem.coeffs.clone(), domain.clone())?;
    let hard = ChernoffStep::hard_kill(problem.coeffs.clone(), domain.clone())?;
    let f0 = |x: &[f64]| problem.initial.eval(x);
    let soft_final = final_value(&soft, &f0)?;
    let h = t / n as f64;
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let stats = batch_means(mc.units(), mc.batches, 3, |u, res| {
            let mut kernels = [ChainKernel::new(&soft, h)?, ChainKernel::new(&hard, h)?];
            let rng = substream(mc.seed, &[u as u64]);
            run_unit(&mut kernels, &[&*soft_final, &f0], n, p, rng, mc.antithetic, &mut res[..2])?;
            res[2] = res[0] - res[1];
            Ok(())
        })?;
        let (s, h) = (stats[0], stats[1]);
        out.push(ComparePoint {
            x: p.clone(),
            soft: s.0,
            soft_stderr: s.1,
            hard: h.0,
            hard_stderr: h.1,
            gap: stats[2].0,
            combined_stderr: s.1.hypot(h.1),
            paired_stderr: stats[2].1,
        });
    }
    Ok(CompareReport {
        n,
        t,
        samples: mc.chains(),
        seed: mc.seed,
        points: out,
    })
}
