//! Numerical checks of the estimates behind the existence theory.

pub mod beta;
pub mod envelope;
pub mod lemmas;
pub mod solution;
pub mod suite;

pub use beta::{beta_time_integral, BetaCheck, BetaPart};
pub use envelope::{compensated_power, missing_mass, regularized_power};
pub use lemmas::{
    verify_heat_estimate, verify_initial_estimate, verify_oseen_decay, verify_oseen_estimate, verify_weighted_young,
    young_constant_1d, young_constant_1d_quadrature,
};
pub use solution::{verify_bootstrap, verify_solution_decay};
pub use suite::{run_suite, VerificationSuiteResult, VerifyConfig};
