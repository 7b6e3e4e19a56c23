//! Fractional calculus and subordination: Caputo, Riemann–Liouville and
//! distributed-order derivatives; one-sided stable laws; the inverse
//! subordinator `E^mu_t` (density, sampling, tail radius); and the
//! subordinated approximants built on the Chernoff/Feynman evaluators.

mod derivatives;
mod inverse;
mod measure;
mod stable;
mod subordinated;

pub use derivatives::{caputo, distributed_derivative, riemann_liouville, TimeSeries};
pub use inverse::{
    inverse_subordinator_density, inverse_subordinator_tail, sample_inverse_subordinator, truncation_radius,
    DensityBudget, PassageSample,
};
pub use measure::SubordinationMeasure;
pub use stable::{sample_stable, SubordinatorLaw};
pub use subordinated::{
    problem_step, subordinate_semigroup, subordinated_solution, subordinated_time_series, subordinated_with_step,
    TauSpec, TimeMixture,
};
