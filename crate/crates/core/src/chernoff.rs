//! One-step Chernoff operators.
//!
//! For `t > 0` the whole-space step is the Gaussian smoothing
//!
//! ```text
//! F(t) phi(x) = e^{-t C(x)} E[phi(Y)],   Y ~ N(x - t B(x) - Z, 2 t A(x)),   Z ~ eta_t
//! ```
//!
//! which is the kernel form `e^{-tC(x)} ∫∫ p_A(t, x - tB(x) - z, y) phi(y) dy eta_t(dz)`.
//! Two killed variants act on functions of the domain `G`:
//!
//! * soft cutoff: `F_o(t) phi = phi_{s(t)} * F(t) E(phi)`, with the cutoff
//!   family of [`Domain::cutoff`] and the reflection extension `E`;
//! * hard kill: `F(t)` restricted to `G`, i.e. the integrals run over `G`
//!   and the value is 0 for `x` outside `G`.
//!
//! Deterministic evaluation uses tensor Gauss–Legendre rules on a window of
//! `w` standard deviations `sqrt(2 t A0)` around the mean, for `d <= 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Backend, FieldMeta, SolutionField};
use crate::linalg;
use crate::model::{extend, CoefficientSet, Domain, InitialCondition};
use crate::quadrature::{GaussLegendre, QuadratureSpec, Table1d};

/// Largest tail mass of `eta_t` dropped by the deterministic evaluator.
const ETA_TAIL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    WholeSpace,
    SoftCutoff,
    HardKill,
}

/// A Chernoff family `F(t)` (or one of its killed variants).
#[derive(Debug, Clone)]
pub struct ChernoffStep {
    coeffs: CoefficientSet,
    domain: Option<Domain>,
    mode: StepMode,
    extension_delta: f64,
}

impl ChernoffStep {
    pub fn new(coeffs: CoefficientSet, domain: Option<Domain>, mode: StepMode) -> Result<Self> {
        match (mode, &domain) {
            (StepMode::WholeSpace, Some(_)) => {
                return Err(Error::invalid("whole-space step takes no domain"));
            }
            (StepMode::SoftCutoff | StepMode::HardKill, None) => {
                return Err(Error::invalid("killed steps need a domain"));
            }
            _ => {}
        }
        if let Some(g) = &domain {
            if g.dim() != coeffs.dim() {
                return Err(Error::DimensionMismatch {
                    expected: coeffs.dim(),
                    got: g.dim(),
                });
            }
        }
        let extension_delta = domain.as_ref().map_or(0.0, |g| g.inradius().min(0.5));
        Ok(Self {
            coeffs,
            domain,
            mode,
            extension_delta,
        })
    }

    pub fn whole_space(coeffs: CoefficientSet) -> Self {
        Self::new(coeffs, None, StepMode::WholeSpace).expect("whole-space step is always valid")
    }

    pub fn soft_cutoff(coeffs: CoefficientSet, domain: Domain) -> Result<Self> {
        Self::new(coeffs, Some(domain), StepMode::SoftCutoff)
    }

    pub fn hard_kill(coeffs: CoefficientSet, domain: Domain) -> Result<Self> {
        Self::new(coeffs, Some(domain), StepMode::HardKill)
    }

    /// Collar width of the extension used in soft mode.
    pub fn with_extension_delta(mut self, delta: f64) -> Result<Self> {
        if let Some(g) = &self.domain {
            // validates the width against the domain
            extend(g, |_: &[f64]| 0.0, delta)?;
        }
        self.extension_delta = delta;
        Ok(self)
    }

    /// The same coefficients and domain under another mode.
    pub fn with_mode(&self, mode: StepMode) -> Result<Self> {
        let domain = match mode {
            StepMode::WholeSpace => None,
            _ => self.domain.clone(),
        };
        let mut s = Self::new(self.coeffs.clone(), domain, mode)?;
        s.extension_delta = self.extension_delta;
        Ok(s)
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn domain(&self) -> Option<&Domain> {
        self.domain.as_ref()
    }

    pub fn mode(&self) -> StepMode {
        self.mode
    }

    pub fn extension_delta(&self) -> f64 {
        self.extension_delta
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }
}

/// `p_A(t, x, y) = (4 pi t)^{-d/2} det A(x)^{-1/2} exp(-A(x)^{-1}(x-y).(x-y) / (4t))`.
pub fn gaussian_kernel(coeffs: &CoefficientSet, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("kernel needs t > 0"));
    }
    let d = coeffs.dim();
    let mut a = vec![0.0; d * d];
    coeffs.diffusion_at(x, &mut a);
    let l = linalg::cholesky(&a, d, x)?;
    let v: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mut scratch = vec![0.0; d];
    let q = linalg::inv_quad_form(&l, d, &v, &mut scratch);
    let log_norm = -0.5 * (d as f64 * (4.0 * std::f64::consts::PI * t).ln() + linalg::log_det(&l, d));
    Ok((log_norm - q / (4.0 * t)).exp())
}

/// Visits the quadrature representation of the sub-probability measure
/// `F(t)(x, dy)` (before any extension of the integrand): each call gets a
/// node `y` and its weight, already including `e^{-tC(x)}`, the cutoff (soft
/// mode), the `eta_t` atom probability and the Gaussian density.
fn visit_step(
    step: &ChernoffStep,
    t: f64,
    x: &[f64],
    quad: &QuadratureSpec,
    visit: &mut dyn FnMut(&[f64], f64),
) -> Result<()> {
    let d = step.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if d > 2 {
        return Err(Error::UnsupportedQuadDim { dim: d });
    }
    let coeffs = &step.coeffs;
    let mut prefactor = (-t * coeffs.killing_at(x)).exp();
    match (step.mode, &step.domain) {
        (StepMode::HardKill, Some(g)) if !g.contains(x) => return Ok(()),
        (StepMode::SoftCutoff, Some(g)) => {
            prefactor *= g.cutoff(t, x);
            if prefactor == 0.0 {
                return Ok(());
            }
        }
        _ => {}
    }
    let mut a = vec![0.0; d * d];
    coeffs.diffusion_at(x, &mut a);
    for v in a.iter_mut() {
        *v *= 2.0 * t;
    }
    let l = linalg::cholesky(&a, d, x)?;
    let log_norm = -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + linalg::log_det(&l, d));
    let mut b = vec![0.0; d];
    coeffs.drift_at(x, &mut b);

    let etas = match coeffs.jump() {
        Some(j) => j.eta_atoms(t, ETA_TAIL),
        None => vec![(vec![0.0; d], 1.0)],
    };
    let half_width = quad.window * (2.0 * t * coeffs.ellipticity().1).sqrt();
    let gl = GaussLegendre::cached(quad.nodes);
    let clip = match (step.mode, &step.domain) {
        (StepMode::HardKill, Some(g)) => Some(g.bounding_box()),
        _ => None,
    };
    let hard_domain = match step.mode {
        StepMode::HardKill => step.domain.as_ref(),
        _ => None,
    };

    let mut mean = vec![0.0; d];
    let mut ranges = vec![(0.0, 0.0); d];
    let mut y = vec![0.0; d];
    let mut diff = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for (z, q) in &etas {
        for i in 0..d {
            mean[i] = x[i] - t * b[i] - z[i];
            let (mut lo, mut hi) = (mean[i] - half_width, mean[i] + half_width);
            if let Some((blo, bhi)) = &clip {
                lo = lo.max(blo[i]);
                hi = hi.min(bhi[i]);
            }
            ranges[i] = (lo, hi);
        }
        if ranges.iter().any(|(lo, hi)| lo >= hi) {
            continue;
        }
        let weight0 = prefactor * q;
        let mut node = |y: &[f64], w: f64, visit: &mut dyn FnMut(&[f64], f64)| {
            if let Some(g) = hard_domain {
                if !g.contains(y) {
                    return;
                }
            }
            for i in 0..d {
                diff[i] = y[i] - mean[i];
            }
            let qf = linalg::inv_quad_form(&l, d, &diff, &mut scratch);
            visit(y, weight0 * w * (log_norm - 0.5 * qf).exp());
        };
        match d {
            1 => {
                for (y0, w0) in gl.mapped(ranges[0].0, ranges[0].1) {
                    y[0] = y0;
                    node(&y, w0, visit);
                }
            }
            2 => {
                let ys: Vec<(f64, f64)> = gl.mapped(ranges[1].0, ranges[1].1).collect();
                for (y0, w0) in gl.mapped(ranges[0].0, ranges[0].1) {
                    for &(y1, w1) in &ys {
                        y[0] = y0;
                        y[1] = y1;
                        node(&y, w0 * w1, visit);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    Ok(())
}

/// Deterministic evaluation of one Chernoff step `F(t) phi (x)` under the
/// step's mode. `t = 0` returns `phi(x)`.
pub fn apply_step(
    step: &ChernoffStep,
    t: f64,
    phi: &(dyn Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    quad: &QuadratureSpec,
) -> Result<f64> {
    quad.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("step size must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(phi(x));
    }
    let mut acc = 0.0;
    match (step.mode, &step.domain) {
        (StepMode::SoftCutoff, Some(g)) => {
            let ext = extend(g, phi, step.extension_delta)?;
            let mut scratch = vec![0.0; step.dim()];
            visit_step(step, t, x, quad, &mut |y, w| acc += w * ext.eval_with(y, &mut scratch))?;
        }
        _ => visit_step(step, t, x, quad, &mut |y, w| acc += w * phi(y))?,
    }
    Ok(acc)
}

/// Total weight `F(t) 1 (x)` of the step measure (before extension), i.e.
/// the sub-Markov mass.
pub fn step_mass(step: &ChernoffStep, t: f64, x: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    let mut acc = 0.0;
    visit_step(step, t, x, quad, &mut |_, w| acc += w)?;
    Ok(acc)
}

/// Piecewise-Lagrange basis weights of a table at `y`: up to four
/// `(node index, weight)` pairs.
fn basis(xs: &[f64], y: f64, order: usize, out: &mut Vec<(usize, f64)>) {
    out.clear();
    let n = xs.len();
    if !(y >= xs[0] && y <= xs[n - 1]) {
        return;
    }
    let i = match xs.partition_point(|&v| v <= y) {
        0 => 0,
        p => (p - 1).min(n - 2),
    };
    if order < 3 || n < 4 {
        let s = (y - xs[i]) / (xs[i + 1] - xs[i]);
        out.push((i, 1.0 - s));
        out.push((i + 1, s));
        return;
    }
    let start = i.saturating_sub(1).min(n - 4);
    for j in 0..4 {
        let mut b = 1.0;
        for k in 0..4 {
            if k != j {
                b *= (y - xs[start + k]) / (xs[start + j] - xs[start + k]);
            }
        }
        out.push((start + j, b));
    }
}

/// Row of the linear map `table values -> [F(h) u](x)` for the
/// interpolated function `u`, extended by zero outside the table.
fn operator_row(
    step: &ChernoffStep,
    h: f64,
    x: &[f64],
    xs: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let mut row = vec![0.0; xs.len()];
    let mut b = Vec::with_capacity(4);
    visit_step(step, h, x, quad, &mut |y, w| {
        basis(xs, y[0], quad.interp_order, &mut b);
        for &(j, bj) in &b {
            row[j] += w * bj;
        }
    })?;
    Ok(row)
}

/// `[F(t/n)]^n phi` at the grid points, for `d = 1`.
///
/// Intermediate functions are tabulated on a fixed set of
/// `quad.table_nodes` Gauss–Legendre nodes (plus the interval ends) and interpolated between them; since the
/// step size is the same at every level, the interpolated step is a fixed
/// matrix applied `n - 2` times. The first level integrates `phi` itself and
/// the last level is evaluated directly at the grid points, so `n = 1`
/// coincides with [`apply_step`]. The reported `stderr` is the gap between
/// the direct last-level value and interpolation of the last-level table,
/// i.e. one level's interpolation error; the total is at most `n - 1` times
/// that by contraction, and much less in practice.
///
/// In soft mode this is the iterated-integral form of `F_o(t/n)^n phi`: the
/// extension `E` acts on `phi` only, while the intermediate iterates (which
/// the cutoff already confines to `G`) are extended by zero. Re-extending
/// every iterate by even reflection would feed the reflected mass back into
/// `G` at each level and drift towards a reflecting boundary.
pub fn chernoff_iterate(
    step: &ChernoffStep,
    n: usize,
    t: f64,
    phi: &InitialCondition,
    grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<SolutionField> {
    quad.validate()?;
    if step.dim() != 1 {
        return Err(Error::invalid(format!(
            "iterated deterministic evaluation is one-dimensional, got d = {}",
            step.dim()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(t > 0.0) {
        return Err(Error::invalid("chernoff_iterate needs t > 0"));
    }
    let h = t / n as f64;
    let f = |x: &[f64]| phi.eval(x);
    let meta = FieldMeta {
        t,
        n,
        samples: 0,
        seed: None,
        backend: Backend::Quad,
    };
    let points: Vec<Vec<f64>> = grid.iter().map(|&x| vec![x]).collect();
    if n == 1 {
        let values = points
            .iter()
            .map(|p| apply_step(step, t, &f, p, quad))
            .collect::<Result<Vec<_>>>()?;
        let stderr = vec![0.0; values.len()];
        return Ok(SolutionField {
            points,
            values,
            stderr,
            meta,
        });
    }

    let xs = table_nodes(step, t, phi, grid, quad)?;
    let requested = n.saturating_mul(xs.len());
    if requested > quad.budget {
        return Err(Error::BudgetExceeded {
            requested,
            budget: quad.budget,
        });
    }
    let mut u: Vec<f64> = xs
        .iter()
        .map(|&x| apply_step(step, h, &f, &[x], quad))
        .collect::<Result<_>>()?;
    let matrix: Vec<Vec<f64>> = xs
        .iter()
        .map(|&x| operator_row(step, h, &[x], &xs, quad))
        .collect::<Result<_>>()?;
    let mut next = vec![0.0; xs.len()];
    for _ in 2..n {
        for (v, row) in next.iter_mut().zip(&matrix) {
            *v = row.iter().zip(&u).map(|(a, b)| a * b).sum();
        }
        std::mem::swap(&mut u, &mut next);
    }
    let last_table: Vec<f64> = matrix
        .iter()
        .map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum())
        .collect();
    let table = Table1d::new(xs.clone(), last_table, quad.interp_order);
    let mut values = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for &x in grid {
        let row = operator_row(step, h, &[x], &xs, quad)?;
        let v: f64 = row.iter().zip(&u).map(|(a, b)| a * b).sum();
        values.push(v);
        stderr.push((v - table.eval(x)).abs());
    }
    Ok(SolutionField {
        points,
        values,
        stderr,
        meta,
    })
}

/// Tabulation nodes: the closure of `G` in killed modes; otherwise the hull
/// of the grid and the support of `phi`, widened by the reach of `t` worth
/// of diffusion, drift and jumps.
fn table_nodes(
    step: &ChernoffStep,
    t: f64,
    phi: &InitialCondition,
    grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let (lo, hi) = match &step.domain {
        Some(g) => {
            let (lo, hi) = g.bounding_box();
            (lo[0], hi[0])
        }
        None => {
            let coeffs = &step.coeffs;
            let mut lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let (c, r) = phi.support(1);
            if r.is_finite() {
                lo = lo.min(c[0] - r);
                hi = hi.max(c[0] + r);
            }
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid("empty evaluation grid"));
            }
            let mut b_max = 0.0f64;
            let mut b = [0.0];
            for i in 0..=64 {
                let x = lo + (hi - lo) * i as f64 / 64.0;
                coeffs.drift_at(&[x], &mut b);
                b_max = b_max.max(b[0].abs());
            }
            let jump_reach = coeffs.jump().map_or(0.0, |j| {
                j.eta_atoms(t, 1e-12)
                    .iter()
                    .fold(0.0f64, |m, (z, _)| m.max(z[0].abs()))
            });
            let margin =
                quad.window * (2.0 * t * coeffs.ellipticity().1).sqrt() + t * b_max + jump_reach;
            (lo - margin, hi + margin)
        }
    };
    let gl = GaussLegendre::cached(quad.table_nodes);
    let mut xs = Vec::with_capacity(quad.table_nodes + 2);
    xs.push(lo);
    xs.extend(gl.mapped(lo, hi).map(|(x, _)| x));
    xs.push(hi);
    Ok(xs)
}
