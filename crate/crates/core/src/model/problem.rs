use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::coefficients::CoefficientSet;
use super::domain::{Domain, DomainKind};
use crate::error::{Error, Result};
use crate::fractional::SubordinationMeasure;

/// Initial data `f0`.
#[derive(Clone)]
pub enum InitialCondition {
    Zero,
    Constant(f64),
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`.
    Gaussian {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
    },
    /// `amplitude * prod_i sin(k_i pi (x_i - lo_i) / (hi_i - lo_i))` on the
    /// box `[lo, hi]`, zero outside it.
    SineMode {
        lo: Vec<f64>,
        hi: Vec<f64>,
        modes: Vec<usize>,
        amplitude: f64,
    },
    Custom {
        f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
        sup: f64,
        radius: f64,
    },
}

impl fmt::Debug for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "Zero"),
            Self::Constant(c) => write!(f, "Constant({c})"),
            Self::Gaussian {
                center,
                width,
                amplitude,
            } => write!(f, "Gaussian({center:?}, {width}, {amplitude})"),
            Self::SineMode { modes, .. } => write!(f, "SineMode({modes:?})"),
            Self::Custom { sup, radius, .. } => write!(f, "Custom(sup={sup}, radius={radius})"),
        }
    }
}

impl InitialCondition {
    /// `sin(x)` on `(0, pi)`, the first Dirichlet eigenmode.
    pub fn sine() -> Self {
        Self::SineMode {
            lo: vec![0.0],
            hi: vec![PI],
            modes: vec![1],
            amplitude: 1.0,
        }
    }

    /// `exp(-x^2 / 2)` in one dimension.
    pub fn standard_gaussian() -> Self {
        Self::Gaussian {
            center: vec![0.0],
            width: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(c) => *c,
            Self::Gaussian {
                center,
                width,
                amplitude,
            } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            Self::SineMode {
                lo,
                hi,
                modes,
                amplitude,
            } => {
                let mut v = *amplitude;
                for i in 0..lo.len() {
                    if x[i] < lo[i] || x[i] > hi[i] {
                        return 0.0;
                    }
                    v *= (modes[i] as f64 * PI * (x[i] - lo[i]) / (hi[i] - lo[i])).sin();
                }
                v
            }
            Self::Custom { f, .. } => f(x),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(c) => c.abs(),
            Self::Gaussian { amplitude, .. } | Self::SineMode { amplitude, .. } => amplitude.abs(),
            Self::Custom { sup, .. } => *sup,
        }
    }

    /// `(center, radius)` of a ball outside which `|f0|` is below
    /// `1e-16 * sup`. Infinite radius means no decay.
    pub fn support(&self, dim: usize) -> (Vec<f64>, f64) {
        match self {
            Self::Zero => (vec![0.0; dim], 0.0),
            Self::Constant(_) => (vec![0.0; dim], f64::INFINITY),
            Self::Gaussian { center, width, .. } => {
                (center.clone(), width * (2.0 * 16.0 * std::f64::consts::LN_10).sqrt())
            }
            Self::SineMode { lo, hi, .. } => {
                let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let r = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| 0.25 * (b - a) * (b - a))
                    .sum::<f64>()
                    .sqrt();
                (c, r)
            }
            Self::Custom { radius, .. } => (vec![0.0; dim], *radius),
        }
    }

    fn dim_hint(&self) -> Option<usize> {
        match self {
            Self::Gaussian { center, .. } => Some(center.len()),
            Self::SineMode { lo, .. } => Some(lo.len()),
            _ => None,
        }
    }
}

/// A Cauchy (no domain) or Cauchy–Dirichlet problem, optionally with a
/// distributed-order time-fractional derivative.
#[derive(Debug, Clone)]
pub struct Problem {
    pub coeffs: CoefficientSet,
    pub domain: Option<Domain>,
    pub initial: InitialCondition,
    pub fractional: Option<SubordinationMeasure>,
    pub horizon: f64,
}

impl Problem {
    pub fn new(
        coeffs: CoefficientSet,
        domain: Option<Domain>,
        initial: InitialCondition,
        fractional: Option<SubordinationMeasure>,
        horizon: f64,
    ) -> Result<Self> {
        let d = coeffs.dim();
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid(format!("horizon must be positive, got {horizon}")));
        }
        if let Some(g) = &domain {
            if g.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: g.dim(),
                });
            }
        }
        if let Some(k) = initial.dim_hint() {
            if k != d {
                return Err(Error::DimensionMismatch { expected: d, got: k });
            }
        }
        if let Some(g) = &domain {
            let tol = 1e-9 * initial.sup_norm().max(1.0);
            for p in boundary_probes(g) {
                let v = initial.eval(&p);
                if v.abs() > tol {
                    return Err(Error::ValidationFailed {
                        what: "initial condition must vanish on the boundary".into(),
                        point: p,
                        value: v,
                    });
                }
            }
        }
        Ok(Self {
            coeffs,
            domain,
            initial,
            fractional,
            horizon,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    /// `f0` extended by zero outside the closure of the domain.
    pub fn initial_value(&self, x: &[f64]) -> f64 {
        match &self.domain {
            Some(g) if g.signed_dist(x) < 0.0 => 0.0,
            _ => self.initial.eval(x),
        }
    }
}

/// A few points on `dG` (interval ends, box face centres and corners,
/// axis poles of a ball).
fn boundary_probes(g: &Domain) -> Vec<Vec<f64>> {
    match g.kind() {
        DomainKind::Interval { lo, hi } => vec![vec![*lo], vec![*hi]],
        DomainKind::Box { lo, hi } => {
            let d = lo.len();
            let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let mut out = Vec::new();
            for i in 0..d {
                for end in [lo[i], hi[i]] {
                    let mut p = mid.clone();
                    p[i] = end;
                    out.push(p);
                }
            }
            out.push(lo.clone());
            out.push(hi.clone());
            out
        }
        DomainKind::Ball { center, radius } => {
            let mut out = Vec::new();
            for i in 0..center.len() {
                for s in [-1.0, 1.0] {
                    let mut p = center.clone();
                    p[i] += s * radius;
                    out.push(p);
                }
            }
            out
        }
    }
}
