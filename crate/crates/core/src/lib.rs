//! Nonparametric estimation of two-component mixtures identified by an
//! exclusion restriction and tail dominance.
//!
//! The observable conditional CDF is `F(y|x) = lambda(x) G(y) + (1 - lambda(x)) H(y)`
//! where the components `G`, `H` do not depend on the instrument `x`, `G` has
//! the thinner left tail and `H` the thinner right tail. Ratios of subsample
//! CDFs taken at intermediate order statistics then recover the mixing
//! proportions and, through them, both components.
//!
//! * [`tail_ratio`] estimates the left and right tail ratios.
//! * [`mixture`] turns them into `lambda(x)`, `G` and `H` with plug-in
//!   standard errors.
//! * [`spec_test`] compares component estimates across instrument
//!   partitions.
//! * [`monte_carlo`] runs skew-normal simulation studies.

pub mod cli;
pub mod data;
pub mod empirical;
pub mod error;
pub mod mixture;
pub mod monte_carlo;
pub mod skew_normal;
pub mod spec_test;
pub mod tail_ratio;
pub mod tuning;

pub use data::{ingest_csv, LabelSet, Observation, Partition, Sample, TuningConstants};
pub use error::{Error, Result};
pub use mixture::{
    component_cdf_one_sided, component_cdfs, jacobians, lambda_hat, ComponentCdfEstimate,
    ComponentCurve, EstimationOptions, MixingProportionEstimate,
};
pub use skew_normal::SkewNormalParams;
pub use spec_test::{run_spec_test, Component, SpecTestResult, Weight};
pub use tail_ratio::{zeta_minus_hat, zeta_plus_hat, TailRatioEstimate, TailSide};
pub use tuning::{cut_counts, pareto_rate_exponent, CutSelection};

/// Two-sided 95% normal critical value.
pub const Z95: f64 = 1.96;
