use rand::Rng;
use rand_distr::{Exp1, Open01, Poisson, Distribution};

use super::SubordinationMeasure;
use crate::error::{Error, Result};

/// One draw of the standard one-sided `beta`-stable law,
/// `E exp(-s X) = exp(-s^beta)`, by Kanter's representation
///
/// ```text
/// X = sin(beta U) / sin(U)^{1/beta} * (sin((1 - beta) U) / W)^{(1 - beta)/beta}
/// ```
///
/// with `U ~ Uniform(0, pi)` and `W ~ Exp(1)`.
pub fn sample_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    debug_assert!(beta > 0.0 && beta < 1.0);
    let u = std::f64::consts::PI * rng.sample::<f64, _>(Open01);
    let w: f64 = rng.sample(Exp1);
    let a = (beta * u).sin() / u.sin().powf(1.0 / beta);
    let b = ((1.0 - beta) * u).sin() / w;
    a * b.powf((1.0 - beta) / beta)
}

/// Laws of subordinators (nonnegative convolution semigroups `eta_t` on
/// `[0, inf)`), sampled at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub enum SubordinatorLaw {
    /// `eta_t = delta_0`.
    Zero,
    /// `eta_t = delta_{c t}`.
    Drift(f64),
    /// `D^beta_t = t^{1/beta} X` with `X` standard one-sided stable.
    Stable(f64),
    /// `sum_i w_i^{1/beta_i} D^{beta_i}_t`, Laplace exponent `f^mu`.
    Mixture(SubordinationMeasure),
    /// Positive jumps `(size, probability)` at `rate` per unit time.
    CompoundPoisson { rate: f64, jumps: Vec<(f64, f64)> },
}

impl SubordinatorLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Zero => Ok(()),
            Self::Drift(c) if *c >= 0.0 && c.is_finite() => Ok(()),
            Self::Drift(c) => Err(Error::invalid(format!("drift must be >= 0, got {c}"))),
            Self::Stable(b) if *b > 0.0 && *b < 1.0 => Ok(()),
            Self::Stable(b) => Err(Error::invalid(format!("stable index must lie in (0, 1), got {b}"))),
            Self::Mixture(_) => Ok(()),
            Self::CompoundPoisson { rate, jumps } => {
                let mass: f64 = jumps.iter().map(|j| j.1).sum();
                if !(*rate > 0.0) || jumps.is_empty() || (mass - 1.0).abs() > 1e-12 {
                    return Err(Error::invalid("compound Poisson subordinator needs rate > 0 and a normalized jump law"));
                }
                if jumps.iter().any(|&(s, p)| !(s > 0.0) || !(p > 0.0)) {
                    return Err(Error::invalid("subordinator jumps must be positive"));
                }
                Ok(())
            }
        }
    }

    /// Laplace exponent `psi(s)`, `E exp(-s S_t) = exp(-t psi(s))`.
    pub fn laplace_exponent(&self, s: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Drift(c) => c * s,
            Self::Stable(b) => s.powf(*b),
            Self::Mixture(mu) => mu.bernstein(s),
            Self::CompoundPoisson { rate, jumps } => {
                rate * jumps.iter().map(|&(y, p)| p * (1.0 - (-s * y).exp())).sum::<f64>()
            }
        }
    }

    /// One draw of `S_t`.
    pub fn sample<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Zero => 0.0,
            Self::Drift(c) => c * t,
            Self::Stable(b) => t.powf(1.0 / b) * sample_stable(*b, rng),
            Self::Mixture(mu) => mu
                .atoms()
                .iter()
                .map(|&(b, w)| (w * t).powf(1.0 / b) * sample_stable(b, rng))
                .sum(),
            Self::CompoundPoisson { rate, jumps } => {
                let k = Poisson::new(rate * t).map_or(0.0, |p| p.sample(rng)) as u64;
                let mut s = 0.0;
                for _ in 0..k {
                    let mut u: f64 = rng.random();
                    let mut pick = jumps[jumps.len() - 1].0;
                    for &(y, p) in jumps {
                        if u < p {
                            pick = y;
                            break;
                        }
                        u -= p;
                    }
                    s += pick;
                }
                s
            }
        }
    }
}
