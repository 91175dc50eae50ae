//! Functionals, exact drift oracles, Monte Carlo estimators and closed-form bounds.

pub mod bounds;
pub mod drift;
pub mod estimate;
pub mod functionals;

pub use bounds::{bound_report, BoundReport};
pub use drift::{exact_drift, one_step_mean, DriftFunctional};
pub use functionals::{augmented_entropy, distance, entropy, fannes_check, Distance};
