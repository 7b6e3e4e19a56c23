//! Finite-intensity jump part `N(dy) = rate * law(dy)` and its convolution
//! semigroup `eta_t` (compound Poisson shifted by the compensator drift).

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::coefficients::CoefficientSet;
use crate::error::{Error, Result};

/// Compound-Poisson jump part with an atomic jump law.
///
/// The convolution semigroup of `N` is
/// `eta_t = law(J_1 + ... + J_K) * delta_{-t m}` with `K ~ Poisson(rate t)`
/// and compensator `m = rate * E[J / (1 + |J|^2)]`; every `eta_t` is a
/// probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpComponent {
    rate: f64,
    atoms: Vec<(Vec<f64>, f64)>,
    drift_correction: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl JumpComponent {
    /// `atoms` are `(jump, probability)` pairs; probabilities must sum to 1.
    pub fn new(rate: f64, atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::invalid(format!("jump rate must be finite and positive, got {rate}")));
        }
        let Some(dim) = atoms.first().map(|a| a.0.len()) else {
            return Err(Error::invalid("jump law needs at least one atom"));
        };
        if dim == 0 || atoms.iter().any(|a| a.0.len() != dim) {
            return Err(Error::invalid("jump atoms must share a positive dimension"));
        }
        if atoms.iter().any(|a| !(a.1 > 0.0)) {
            return Err(Error::invalid("jump atom probabilities must be positive"));
        }
        if atoms.iter().any(|a| a.0.iter().all(|v| *v == 0.0)) {
            return Err(Error::invalid("jump law lives on R^d minus the origin"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("jump law must have total mass 1, got {total}")));
        }
        let mut drift_correction = vec![0.0; dim];
        for (y, p) in &atoms {
            let y2: f64 = y.iter().map(|v| v * v).sum();
            for (m, v) in drift_correction.iter_mut().zip(y) {
                *m += rate * p * v / (1.0 + y2);
            }
        }
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc += a.1;
                acc
            })
            .collect();
        Ok(Self {
            rate,
            atoms,
            drift_correction,
            cumulative,
        })
    }

    pub fn dim(&self) -> usize {
        self.drift_correction.len()
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn atoms(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms
    }

    /// Compensator `m = rate * E[J / (1 + |J|^2)]`.
    pub fn drift_correction(&self) -> &[f64] {
        &self.drift_correction
    }

    /// Sampler for `eta_t` at a fixed `t`.
    pub fn eta(&self, t: f64) -> EtaSampler<'_> {
        let mean = self.rate * t;
        EtaSampler {
            jump: self,
            t,
            poisson: if mean > 0.0 { Poisson::new(mean).ok() } else { None },
        }
    }

    /// `eta_t` as an explicit list of `(point, probability)` atoms. Poisson
    /// orders are enumerated until the remaining tail mass drops below `tol`;
    /// the returned masses therefore sum to at least `1 - tol`.
    pub fn eta_atoms(&self, t: f64, tol: f64) -> Vec<(Vec<f64>, f64)> {
        let d = self.dim();
        let mean = self.rate * t;
        let shift: Vec<f64> = self.drift_correction.iter().map(|m| -t * m).collect();
        // law of J_1 + ... + J_k, built by repeated convolution
        let mut sum_law: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; d], 1.0)];
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut pk = (-mean).exp();
        let mut covered = 0.0;
        let mut k = 0usize;
        loop {
            for (pos, q) in &sum_law {
                let p: Vec<f64> = pos.iter().zip(&shift).map(|(a, b)| a + b).collect();
                out.push((p, pk * q));
            }
            covered += pk;
            if 1.0 - covered < tol || k > 10_000 {
                break;
            }
            k += 1;
            pk *= mean / k as f64;
            let mut next: Vec<(Vec<f64>, f64)> = Vec::new();
            for (pos, q) in &sum_law {
                for (y, py) in &self.atoms {
                    let p: Vec<f64> = pos.iter().zip(y).map(|(a, b)| a + b).collect();
                    match next
                        .iter_mut()
                        .find(|(e, _)| e.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12))
                    {
                        Some(entry) => entry.1 += q * py,
                        None => next.push((p, q * py)),
                    }
                }
            }
            sum_law = next;
        }
        out
    }

    fn pick_atom(&self, u: f64) -> &[f64] {
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        &self.atoms[i].0
    }
}

/// Draws from `eta_t` for one fixed `t`.
pub struct EtaSampler<'a> {
    jump: &'a JumpComponent,
    t: f64,
    poisson: Option<Poisson<f64>>,
}

impl EtaSampler<'_> {
    /// Writes one draw of `eta_t` into `out`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (o, m) in out.iter_mut().zip(&self.jump.drift_correction) {
            *o = -self.t * m;
        }
        let k = match &self.poisson {
            Some(p) => p.sample(rng) as u64,
            None => 0,
        };
        for _ in 0..k {
            let y = self.jump.pick_atom(rng.random::<f64>());
            for (o, v) in out.iter_mut().zip(y) {
                *o += v;
            }
        }
    }
}

/// Settings for [`validate_jump_domain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpDomainCheck {
    /// Width of `U = G^delta`.
    pub delta: f64,
    /// Probe points per axis of the bounding box.
    pub probes_per_axis: usize,
    /// Largest admissible `N(-x + U \ closure(G))`.
    pub tolerance: f64,
    /// Truncate jumps from `x` to `|y| <= dist(x, dG)` before measuring.
    pub censored: bool,
}

impl Default for JumpDomainCheck {
    fn default() -> Self {
        Self {
            delta: 0.5,
            probes_per_axis: 64,
            tolerance: 0.0,
            censored: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpDomainReport {
    pub probes: usize,
    pub max_mass: f64,
    pub worst_probe: Option<Vec<f64>>,
    pub censored: bool,
}

/// Checks that jumps from `G` never land in the collar `U \ closure(G)`,
/// i.e. `N(-x + U \ closure(G)) <= tolerance` on probe points `x in G`: the
/// process leaves `G` continuously or by a jump that also clears `U`.
pub fn validate_jump_domain(
    coeffs: &CoefficientSet,
    domain: &Domain,
    check: &JumpDomainCheck,
) -> Result<JumpDomainReport> {
    let Some(jump) = coeffs.jump() else {
        return Ok(JumpDomainReport {
            probes: 0,
            max_mass: 0.0,
            worst_probe: None,
            censored: check.censored,
        });
    };
    if jump.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: jump.dim(),
        });
    }
    if !(check.delta > 0.0) {
        return Err(Error::invalid("collar width delta must be positive"));
    }
    let probes = domain.probe_points(check.probes_per_axis);
    let mut landing = vec![0.0; domain.dim()];
    let mut report = JumpDomainReport {
        probes: probes.len(),
        max_mass: 0.0,
        worst_probe: None,
        censored: check.censored,
    };
    for x in &probes {
        let dist = domain.signed_dist(x);
        let mut mass = 0.0;
        for (y, p) in jump.atoms() {
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if check.censored && norm > dist {
                continue;
            }
            for ((l, a), b) in landing.iter_mut().zip(x).zip(y) {
                *l = a + b;
            }
            let sd = domain.signed_dist(&landing);
            // U \ closure(G): outside the closure but within delta of G
            if sd < 0.0 && -sd < check.delta {
                mass += jump.rate() * p;
            }
        }
        if mass > report.max_mass {
            report.max_mass = mass;
            report.worst_probe = Some(x.clone());
        }
    }
    if report.max_mass > check.tolerance {
        return Err(Error::ValidationFailed {
            what: "jumps from G land in U minus closure(G)".into(),
            point: report.worst_probe.clone().unwrap_or_default(),
            value: report.max_mass,
        });
    }
    Ok(report)
}
