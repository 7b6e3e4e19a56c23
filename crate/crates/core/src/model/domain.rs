//! Bounded domains `G`, their interior shrinkings
//! `G_s = {x in G : dist(x, dG) > s}` and the cutoff family used by the
//! soft-killing Chernoff step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default exponent in `s(t) = t^gamma`.
pub const DEFAULT_S_EXPONENT: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Interval { lo: f64, hi: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    kind: DomainKind,
    s_exponent: f64,
}

/// Quintic smoothstep `6u^5 - 15u^4 + 10u^3` on `u` clamped to `[0, 1]`.
/// It is C^2 with vanishing first and second derivatives at both ends.
#[inline]
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

impl Domain {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(DomainKind::Interval { lo, hi }, DEFAULT_S_EXPONENT)
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new(DomainKind::Box { lo, hi }, DEFAULT_S_EXPONENT)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        Self::new(DomainKind::Ball { center, radius }, DEFAULT_S_EXPONENT)
    }

    pub fn new(kind: DomainKind, s_exponent: f64) -> Result<Self> {
        match &kind {
            DomainKind::Interval { lo, hi } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::invalid(format!("interval needs lo < hi, got ({lo}, {hi})")));
                }
            }
            DomainKind::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return Err(Error::DimensionMismatch {
                        expected: lo.len(),
                        got: hi.len(),
                    });
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
                    return Err(Error::invalid("box needs lo_i < hi_i in every coordinate"));
                }
            }
            DomainKind::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::invalid("ball needs a center and a positive radius"));
                }
            }
        }
        if !(s_exponent > 1.0) || !s_exponent.is_finite() {
            return Err(Error::invalid(format!(
                "s(t) = t^gamma must be o(t): need gamma > 1, got {s_exponent}"
            )));
        }
        Ok(Self { kind, s_exponent })
    }

    pub fn with_s_exponent(self, gamma: f64) -> Result<Self> {
        Self::new(self.kind, gamma)
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn s_exponent(&self) -> f64 {
        self.s_exponent
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DomainKind::Interval { .. } => 1,
            DomainKind::Box { lo, .. } => lo.len(),
            DomainKind::Ball { center, .. } => center.len(),
        }
    }

    /// `dist(x, dG)`, positive inside `G` and negative outside.
    pub fn signed_dist(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Interval { lo, hi } => (x[0] - lo).min(hi - x[0]),
            DomainKind::Box { lo, hi } => {
                let mut inside = f64::INFINITY;
                let mut outside2 = 0.0;
                for i in 0..lo.len() {
                    let a = x[i] - lo[i];
                    let b = hi[i] - x[i];
                    inside = inside.min(a.min(b));
                    let excess = (-a).max(-b).max(0.0);
                    outside2 += excess * excess;
                }
                if outside2 > 0.0 {
                    -outside2.sqrt()
                } else {
                    inside
                }
            }
            DomainKind::Ball { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                radius - r2.sqrt()
            }
        }
    }

    /// Open-set membership `x in G`.
    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_dist(x) > 0.0
    }

    /// `s(t) = t^gamma`.
    #[inline]
    pub fn shrink_radius(&self, t: f64) -> f64 {
        t.powf(self.s_exponent)
    }

    /// `x in G_{s(t)}`.
    pub fn in_shrunk(&self, t: f64, x: &[f64]) -> bool {
        self.signed_dist(x) > self.shrink_radius(t)
    }

    /// Cutoff `phi_{s(t)}(x) = smoothstep(dist(x, dG) / s(t))`: equal to 1 on
    /// `G_{s(t)}`, 0 outside `G`, values in `[0, 1]` in between.
    pub fn cutoff(&self, t: f64, x: &[f64]) -> f64 {
        debug_assert!(t > 0.0);
        let d = self.signed_dist(x);
        if d <= 0.0 {
            return 0.0;
        }
        smoothstep(d / self.shrink_radius(t))
    }

    /// Radius of the largest inscribed ball.
    pub fn inradius(&self) -> f64 {
        match &self.kind {
            DomainKind::Interval { lo, hi } => 0.5 * (hi - lo),
            DomainKind::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| 0.5 * (b - a))
                .fold(f64::INFINITY, f64::min),
            DomainKind::Ball { radius, .. } => *radius,
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Interval { lo, hi } => hi - lo,
            DomainKind::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt(),
            DomainKind::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// Axis-aligned bounding box `(lo, hi)` of `G`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            DomainKind::Interval { lo, hi } => (vec![*lo], vec![*hi]),
            DomainKind::Box { lo, hi } => (lo.clone(), hi.clone()),
            DomainKind::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    /// Mirror image across `dG` of a point outside `G`; points of the
    /// closure are returned unchanged. Only meaningful within the inradius
    /// of the boundary.
    pub fn reflect(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            DomainKind::Interval { lo, hi } => {
                out[0] = if x[0] < *lo {
                    2.0 * lo - x[0]
                } else if x[0] > *hi {
                    2.0 * hi - x[0]
                } else {
                    x[0]
                };
            }
            DomainKind::Box { lo, hi } => {
                for i in 0..lo.len() {
                    out[i] = if x[i] < lo[i] {
                        2.0 * lo[i] - x[i]
                    } else if x[i] > hi[i] {
                        2.0 * hi[i] - x[i]
                    } else {
                        x[i]
                    };
                }
            }
            DomainKind::Ball { center, radius } => {
                let r = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    .sqrt();
                if r <= *radius {
                    out.copy_from_slice(x);
                } else {
                    let scale = (2.0 * radius - r).max(0.0) / r;
                    for i in 0..center.len() {
                        out[i] = center[i] + scale * (x[i] - center[i]);
                    }
                }
            }
        }
    }

    /// Regular probe points strictly inside `G`, `per_axis` per coordinate
    /// of the bounding box (points outside a ball are dropped).
    pub fn probe_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let (lo, hi) = self.bounding_box();
        let d = lo.len();
        let per_axis = per_axis.max(1);
        let total = per_axis.pow(d as u32);
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = vec![0.0; d];
            for k in 0..d {
                let i = rem % per_axis;
                rem /= per_axis;
                let u = (i as f64 + 0.5) / per_axis as f64;
                p[k] = lo[k] + u * (hi[k] - lo[k]);
            }
            if self.contains(&p) {
                out.push(p);
            }
        }
        out
    }
}

/// Norm-preserving extension `E(phi)` of a function on the closure of `G`:
/// even reflection across `dG` times a collar that equals 1 within
/// `delta / 2` of `G` and vanishes at distance `delta`.
#[derive(Clone, Copy)]
pub struct Extension<'a, F> {
    domain: &'a Domain,
    phi: F,
    delta: f64,
}

/// Collar profile on `u = dist(x, G) / delta`.
#[inline]
fn collar(u: f64) -> f64 {
    if u <= 0.5 {
        1.0
    } else {
        1.0 - smoothstep(2.0 * u - 1.0)
    }
}

/// Builds `E(phi)` with support in the `delta`-neighbourhood of `G`.
/// `delta` may not exceed the inradius, otherwise reflected points could
/// leave the closure of `G`.
pub fn extend<F>(domain: &Domain, phi: F, delta: f64) -> Result<Extension<'_, F>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(delta > 0.0) {
        return Err(Error::invalid("extension collar width must be positive"));
    }
    if delta > domain.inradius() {
        return Err(Error::UnsupportedDomain(format!(
            "reflection across the boundary needs delta <= inradius ({}), got {delta}",
            domain.inradius()
        )));
    }
    Ok(Extension { domain, phi, delta })
}

impl<F> Extension<'_, F>
where
    F: Fn(&[f64]) -> f64,
{
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Evaluates `E(phi)(x)`; `scratch` must have length `dim`.
    #[inline]
    pub fn eval_with(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        let sd = self.domain.signed_dist(x);
        if sd >= 0.0 {
            return (self.phi)(x);
        }
        let out = -sd;
        if out >= self.delta {
            return 0.0;
        }
        self.domain.reflect(x, scratch);
        (self.phi)(scratch) * collar(out / self.delta)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0; x.len()];
        self.eval_with(x, &mut scratch)
    }
}
