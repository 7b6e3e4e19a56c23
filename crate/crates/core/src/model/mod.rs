//! Problem definitions: coefficients, domains, cutoffs, extensions and the
//! structural checks on them.

pub mod catalog;
mod coefficients;
mod domain;
mod jump;
mod problem;

pub use coefficients::{CoefficientSet, InvariantReport, MatrixField, ScalarField, VectorField};
pub use domain::{extend, smoothstep, Domain, DomainKind, Extension, DEFAULT_S_EXPONENT};
pub use jump::{validate_jump_domain, EtaSampler, JumpComponent, JumpDomainCheck, JumpDomainReport};
pub use problem::{InitialCondition, Problem};
