//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use chernoff_core::model::catalog;
use chernoff_core::{ChernoffStep, Domain};

pub fn heat_step() -> ChernoffStep {
    ChernoffStep::whole_space(catalog::heat(1, 1.0).expect("valid coefficients"))
}

pub fn jump_step() -> ChernoffStep {
    ChernoffStep::whole_space(catalog::compound_poisson(0.5, 1.5, [(0.8, 0.3), (-0.5, 0.7)]).expect("valid coefficients"))
}

/// Heat on `(0, pi)` killed at the boundary.
pub fn killed_step() -> ChernoffStep {
    let g = Domain::interval(0.0, PI).expect("valid interval");
    ChernoffStep::hard_kill(catalog::heat(1, 1.0).expect("valid coefficients"), g).expect("valid step")
}

pub fn sine(x: &[f64]) -> f64 {
    if x[0] > 0.0 && x[0] < PI {
        x[0].sin()
    } else {
        0.0
    }
}
