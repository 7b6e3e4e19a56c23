//! Fixed Gauss–Legendre rules and the interpolation tables used to carry
//! intermediate functions between Chernoff steps.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the three-term recurrence, started from the
    /// Chebyshev-like guess `cos(pi (i - 1/4) / (n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let mut p0 = 1.0;
                let mut p1 = 0.0;
                for j in 0..n {
                    let p2 = p1;
                    p1 = p0;
                    let jf = j as f64;
                    p0 = ((2.0 * jf + 1.0) * z * p1 - jf * p2) / (jf + 1.0);
                }
                // p0 = P_n(z), p1 = P_{n-1}(z)
                dp = nf * (z * p0 - p1) / (z * z - 1.0);
                let dz = p0 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule for `n` nodes, computed once per process.
    pub fn cached(n: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        guard.entry(n).or_insert_with(|| Arc::new(Self::new(n))).clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Deterministic quadrature settings for the Chernoff step evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per dimension.
    pub nodes: usize,
    /// Truncation half-width in standard deviations `sqrt(2 t A0)`.
    pub window: f64,
    /// 1 (linear) or 3 (cubic) interpolation between tabulated nodes.
    pub interp_order: usize,
    /// Gauss–Legendre nodes of the table that carries intermediate iterates.
    #[serde(default = "default_table_nodes")]
    pub table_nodes: usize,
    /// Upper bound on `n * table size` for iterated evaluation.
    pub budget: usize,
}

fn default_table_nodes() -> usize {
    1025
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 257,
            window: 8.0,
            interp_order: 3,
            table_nodes: default_table_nodes(),
            budget: 2_000_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 2 {
            return Err(Error::invalid("quadrature needs at least 2 nodes"));
        }
        if !(self.window > 0.0) {
            return Err(Error::invalid("quadrature window must be positive"));
        }
        if self.table_nodes < 4 {
            return Err(Error::invalid("the iterate table needs at least 4 nodes"));
        }
        if self.interp_order != 1 && self.interp_order != 3 {
            return Err(Error::invalid("interpolation order must be 1 or 3"));
        }
        Ok(())
    }
}

/// A function sampled at sorted abscissae, evaluated by piecewise
/// Lagrange interpolation. Outside the table it returns `outside`.
#[derive(Debug, Clone)]
pub struct Table1d {
    xs: Vec<f64>,
    ys: Vec<f64>,
    order: usize,
    outside: f64,
}

impl Table1d {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, order: usize) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(xs.len() >= 2);
        debug_assert!(xs.windows(2).all(|w| w[0] < w[1]));
        Self {
            xs,
            ys,
            order,
            outside: 0.0,
        }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn lo(&self) -> f64 {
        self.xs[0]
    }

    pub fn hi(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_order(x, self.order)
    }

    pub fn eval_order(&self, x: f64, order: usize) -> f64 {
        let n = self.xs.len();
        if !(x >= self.xs[0] && x <= self.xs[n - 1]) {
            return self.outside;
        }
        // index of the left end of the bracketing interval
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            p => (p - 1).min(n - 2),
        };
        if order < 3 || n < 4 {
            let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
            return self.ys[i] + t * (self.ys[i + 1] - self.ys[i]);
        }
        let start = i.saturating_sub(1).min(n - 4);
        let xs = &self.xs[start..start + 4];
        let ys = &self.ys[start..start + 4];
        let mut acc = 0.0;
        for j in 0..4 {
            let mut basis = 1.0;
            for k in 0..4 {
                if k != j {
                    basis *= (x - xs[k]) / (xs[j] - xs[k]);
                }
            }
            acc += basis * ys[j];
        }
        acc
    }
}
