use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite discrete measure `mu = sum_i w_i delta_{beta_i}` on `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubordinationMeasure {
    atoms: Vec<(f64, f64)>,
}

impl SubordinationMeasure {
    /// Atoms as `(beta, weight)` pairs.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("subordination measure needs at least one atom"));
        }
        for (i, &(beta, w)) in atoms.iter().enumerate() {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::invalid(format!(
                    "atom {i} (beta = {beta}, weight = {w}): beta must lie in (0, 1)"
                )));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::invalid(format!(
                    "atom {i} (beta = {beta}, weight = {w}): weight must be positive"
                )));
            }
        }
        Ok(Self { atoms })
    }

    /// `delta_beta` with unit weight.
    pub fn dirac(beta: f64) -> Result<Self> {
        Self::new(vec![(beta, 1.0)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `f(s) = sum_i w_i s^{beta_i}`.
    pub fn bernstein(&self, s: f64) -> f64 {
        self.atoms.iter().map(|&(b, w)| w * s.powf(b)).sum()
    }

    /// Weight of the single atom at `1/2`, if that is the whole measure.
    /// Such measures have a closed-form inverse-subordinator density.
    pub fn half_weight(&self) -> Option<f64> {
        match self.atoms.as_slice() {
            [(b, w)] if *b == 0.5 => Some(*w),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_atoms() {
        assert!(SubordinationMeasure::new(vec![]).is_err());
        assert!(SubordinationMeasure::new(vec![(1.0, 1.0)]).is_err());
        assert!(SubordinationMeasure::new(vec![(0.5, 0.0)]).is_err());
        let e = SubordinationMeasure::new(vec![(0.3, 0.5), (1.2, 0.5)]).unwrap_err();
        assert!(e.to_string().contains("beta = 1.2"), "{e}");
    }

    #[test]
    fn bernstein_values() {
        let mu = SubordinationMeasure::new(vec![(0.3, 0.5), (0.7, 0.5)]).unwrap();
        assert!((mu.bernstein(1.0) - 1.0).abs() < 1e-15);
        assert_eq!(mu.bernstein(0.0), 0.0);
        assert!((mu.bernstein(4.0) - 0.5 * (4f64.powf(0.3) + 4f64.powf(0.7))).abs() < 1e-14);
        assert_eq!(SubordinationMeasure::dirac(0.5).unwrap().half_weight(), Some(1.0));
        assert_eq!(mu.half_weight(), None);
    }
}
