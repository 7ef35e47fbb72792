//! Scripted studies: quasi-static limit, continuous dependence, convergence.

mod convergence;
mod perturbation;
mod quasistatic;
mod scenario;
mod sweep;

pub use convergence::{convergence_study, elastic_manufactured, restrict, DtRule};
pub use perturbation::{perturbation_bump, perturbation_study, perturbation_terms, DependenceNorm, DependenceTerms, PerturbTarget};
pub use quasistatic::quasistatic_sweep;
pub use scenario::{initial_phi, GridSpec, InitialField, InitialNutrient, Scenario, ScenarioSpec};
pub use sweep::{format_number, loglog_slope, run_trajectory, ExperimentError, SweepResult, Trajectory};
