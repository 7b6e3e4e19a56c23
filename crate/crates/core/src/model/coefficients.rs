//! Coefficient fields `A`, `B`, `C` of the generator
//! `L phi = tr(A Hess phi) - B . grad phi - C phi (+ jump part)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use super::jump::JumpComponent;
use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::substream;

pub type MatrixField = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
pub type VectorField = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
pub type ScalarField = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Diffusion matrix, drift and killing rate, plus the ellipticity bounds
/// `a0 |z|^2 <= z . A(x) z <= A0 |z|^2` and an optional compound-Poisson
/// jump part.
#[derive(Clone)]
pub struct CoefficientSet {
    name: String,
    dim: usize,
    diffusion: Arc<MatrixField>,
    drift: Arc<VectorField>,
    killing: Arc<ScalarField>,
    lower: f64,
    upper: f64,
    constant_diffusion: bool,
    jump: Option<JumpComponent>,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("a0", &self.lower)
            .field("A0", &self.upper)
            .field("jump", &self.jump)
            .finish()
    }
}

impl CoefficientSet {
    /// Variable coefficients. `a0`, `a_upper` are the declared ellipticity
    /// bounds; they are trusted here and spot-checked by
    /// [`CoefficientSet::check_invariants`].
    pub fn new(
        dim: usize,
        a0: f64,
        a_upper: f64,
        diffusion: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        drift: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        killing: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(a0 > 0.0 && a0 <= a_upper && a_upper.is_finite()) {
            return Err(Error::invalid(format!(
                "ellipticity bounds must satisfy 0 < a0 <= A0 < inf, got a0={a0}, A0={a_upper}"
            )));
        }
        Ok(Self {
            name: "custom".into(),
            dim,
            diffusion: Arc::new(diffusion),
            drift: Arc::new(drift),
            killing: Arc::new(killing),
            lower: a0,
            upper: a_upper,
            constant_diffusion: false,
            jump: None,
        })
    }

    /// Constant coefficients; the ellipticity bounds are the extreme
    /// eigenvalues of `a` (row-major `dim * dim`).
    pub fn constant(a: Vec<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        let dim = b.len();
        if dim == 0 || a.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: a.len(),
            });
        }
        if linalg::asymmetry(&a, dim) > 1e-12 {
            return Err(Error::invalid("diffusion matrix must be symmetric"));
        }
        if !(c >= 0.0) {
            return Err(Error::invalid("killing rate must be nonnegative"));
        }
        let eig = linalg::sym_eigenvalues(&a, dim);
        let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(lo > 0.0) {
            return Err(Error::SingularMatrix {
                point: vec![0.0; dim],
            });
        }
        let a2 = a.clone();
        let mut set = Self::new(
            dim,
            lo,
            hi,
            move |_, out| out.copy_from_slice(&a2),
            move |_, out| out.copy_from_slice(&b),
            move |_| c,
        )?;
        set.constant_diffusion = true;
        set.name = "constant".into();
        Ok(set)
    }

    pub fn with_jump(mut self, jump: JumpComponent) -> Result<Self> {
        if jump.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: jump.dim(),
            });
        }
        self.jump = Some(jump);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(a0, A0)`.
    pub fn ellipticity(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn jump(&self) -> Option<&JumpComponent> {
        self.jump.as_ref()
    }

    pub fn has_constant_diffusion(&self) -> bool {
        self.constant_diffusion
    }

    #[inline]
    pub fn diffusion_at(&self, x: &[f64], out: &mut [f64]) {
        (self.diffusion)(x, out)
    }

    #[inline]
    pub fn drift_at(&self, x: &[f64], out: &mut [f64]) {
        (self.drift)(x, out)
    }

    #[inline]
    pub fn killing_at(&self, x: &[f64]) -> f64 {
        (self.killing)(x)
    }

    /// Spot-checks `C >= 0`, symmetry of `A` and the ellipticity bounds on
    /// `probes` random pairs `(x, z)` with `x` uniform in `[-radius, radius]^d`.
    pub fn check_invariants(&self, probes: usize, radius: f64, seed: u64) -> Result<InvariantReport> {
        let d = self.dim;
        let mut rng = substream(seed, &[0xE11]);
        let mut x = vec![0.0; d];
        let mut z = vec![0.0; d];
        let mut a = vec![0.0; d * d];
        let mut report = InvariantReport {
            probes,
            min_ratio: f64::INFINITY,
            max_ratio: 0.0,
            max_asymmetry: 0.0,
            min_killing: f64::INFINITY,
        };
        for _ in 0..probes {
            for v in x.iter_mut() {
                *v = rng.random_range(-radius..=radius);
            }
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            self.diffusion_at(&x, &mut a);
            let asym = linalg::asymmetry(&a, d);
            report.max_asymmetry = report.max_asymmetry.max(asym);
            if asym > 1e-12 {
                return Err(Error::ValidationFailed {
                    what: "symmetry of A(x)".into(),
                    point: x,
                    value: asym,
                });
            }
            let zz: f64 = z.iter().map(|v| v * v).sum();
            let mut zaz = 0.0;
            for i in 0..d {
                for j in 0..d {
                    zaz += z[i] * a[i * d + j] * z[j];
                }
            }
            let ratio = zaz / zz;
            report.min_ratio = report.min_ratio.min(ratio);
            report.max_ratio = report.max_ratio.max(ratio);
            let slack = 1e-12 * self.upper;
            if ratio < self.lower - slack {
                return Err(Error::ValidationFailed {
                    what: "ellipticity lower bound a0".into(),
                    point: x,
                    value: ratio,
                });
            }
            if ratio > self.upper + slack {
                return Err(Error::ValidationFailed {
                    what: "ellipticity upper bound A0".into(),
                    point: x,
                    value: ratio,
                });
            }
            let c = self.killing_at(&x);
            report.min_killing = report.min_killing.min(c);
            if !(c >= 0.0) {
                return Err(Error::ValidationFailed {
                    what: "killing rate C(x) >= 0".into(),
                    point: x,
                    value: c,
                });
            }
        }
        Ok(report)
    }
}

/// Outcome of [`CoefficientSet::check_invariants`].
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub probes: usize,
    /// Smallest observed Rayleigh quotient `z.Az / |z|^2`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_asymmetry: f64,
    pub min_killing: f64,
}
