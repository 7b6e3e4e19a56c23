//! Chernoff approximations and Feynman formulae for Feller semigroups:
//! Cauchy, Cauchy–Dirichlet and distributed-order time-fractional
//! Fokker–Planck–Kolmogorov problems.
//!
//! The evaluators come in two flavours: deterministic Gauss–Legendre
//! quadrature (`d <= 2`, iterated only in `d = 1`) and Monte Carlo over
//! weighted chains. [`oracles`] holds the closed-form and brute-force
//! references they are checked against.

pub mod chernoff;
pub mod error;
pub mod feynman;
pub mod field;
pub mod fractional;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod quadrature;
pub mod rng;

pub use chernoff::{apply_step, chernoff_iterate, gaussian_kernel, ChernoffStep, StepMode};
pub use error::{Error, Result};
pub use field::{Backend, FieldMeta, SolutionField};
pub use fractional::SubordinationMeasure;
pub use model::{CoefficientSet, Domain, DomainKind, InitialCondition, JumpComponent, Problem};
pub use quadrature::QuadratureSpec;
