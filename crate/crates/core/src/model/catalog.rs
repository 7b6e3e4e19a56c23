//! Built-in coefficient sets.

use super::coefficients::CoefficientSet;
use super::jump::JumpComponent;
use crate::error::{Error, Result};

/// `A = a I`, `B = 0`, `C = 0`: `L = a Laplacian`.
pub fn heat(dim: usize, a: f64) -> Result<CoefficientSet> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = a;
    }
    Ok(CoefficientSet::constant(m, vec![0.0; dim], 0.0)?.with_name("heat"))
}

/// One-dimensional `A = a`, `B(x) = theta x`, so the step mean
/// `x - t B(x)` contracts towards the origin.
pub fn ou(theta: f64, a: f64) -> Result<CoefficientSet> {
    if !(a > 0.0) {
        return Err(Error::invalid("ou: a must be positive"));
    }
    Ok(CoefficientSet::new(
        1,
        a,
        a,
        move |_, out| out[0] = a,
        move |x, out| out[0] = theta * x[0],
        |_| 0.0,
    )?
    .with_name("ou"))
}

/// One-dimensional `A(x) = a0 + a1 sin x`, clipped to `[a0 - |a1|, a0 + |a1|]`.
pub fn variable_a(a0: f64, a1: f64) -> Result<CoefficientSet> {
    let lo = a0 - a1.abs();
    let hi = a0 + a1.abs();
    if !(lo > 0.0) {
        return Err(Error::invalid("variable-a: need a0 > |a1| for ellipticity"));
    }
    Ok(CoefficientSet::new(
        1,
        lo,
        hi,
        move |x, out| out[0] = (a0 + a1 * x[0].sin()).clamp(lo, hi),
        |_, out| out[0] = 0.0,
        |_| 0.0,
    )?
    .with_name("variable-a"))
}

/// `A = a I`, `B = 0`, `C = c`.
pub fn constant_killing(dim: usize, a: f64, c: f64) -> Result<CoefficientSet> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = a;
    }
    Ok(CoefficientSet::constant(m, vec![0.0; dim], c)?.with_name("constant-killing"))
}

/// One-dimensional heat part `A = a` plus compound-Poisson jumps of rate
/// `rate` with two atoms `(jump, probability)`.
pub fn compound_poisson(a: f64, rate: f64, atoms: [(f64, f64); 2]) -> Result<CoefficientSet> {
    let jump = JumpComponent::new(rate, atoms.iter().map(|&(y, p)| (vec![y], p)).collect())?;
    Ok(CoefficientSet::constant(vec![a], vec![0.0], 0.0)?
        .with_jump(jump)?
        .with_name("compound-poisson"))
}

/// Default instances of every catalog entry, as used by the validation
/// suites.
pub fn shipped() -> Vec<CoefficientSet> {
    vec![
        heat(1, 0.5).unwrap(),
        heat(2, 0.5).unwrap(),
        ou(1.0, 0.5).unwrap(),
        variable_a(0.6, 0.3).unwrap(),
        constant_killing(1, 0.5, 0.3).unwrap(),
        compound_poisson(0.5, 1.0, [(0.7, 0.5), (-0.4, 0.5)]).unwrap(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_shipped_set_passes_spot_checks() {
        for c in shipped() {
            c.check_invariants(1000, 10.0, 11)
                .unwrap_or_else(|e| panic!("{}: {e}", c.name()));
        }
    }

    #[test]
    fn variable_a_rejects_degenerate() {
        assert!(variable_a(0.2, 0.3).is_err());
    }
}
