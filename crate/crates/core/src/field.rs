//! Evaluated solutions and their CSV / JSON forms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Deterministic Gauss–Legendre quadrature of iterated Chernoff steps.
    Quad,
    /// Monte Carlo over weighted chains.
    Mc,
    /// Closed-form or adaptive-quadrature reference.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub t: f64,
    pub n: usize,
    pub samples: usize,
    pub seed: Option<u64>,
    pub backend: Backend,
}

/// Values (with error estimates) at a list of evaluation points.
///
/// For Monte Carlo fields `stderr` is the batch-means standard error; for
/// quadrature fields it is the interpolation-error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub meta: FieldMeta,
}

impl SolutionField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// CSV with header `x0,..,x{d-1},value,stderr,n,samples,seed`. Floats
    /// use Rust's shortest round-trip formatting, which is locale
    /// independent.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut s = String::new();
        for i in 0..d {
            let _ = write!(s, "x{i},");
        }
        s.push_str("value,stderr,n,samples,seed\n");
        let seed = self.meta.seed.map(|v| v.to_string()).unwrap_or_default();
        for ((p, v), e) in self.points.iter().zip(&self.values).zip(&self.stderr) {
            for c in p {
                let _ = write!(s, "{c:?},");
            }
            let _ = writeln!(s, "{v:?},{e:?},{},{},{seed}", self.meta.n, self.meta.samples);
        }
        s
    }
}
