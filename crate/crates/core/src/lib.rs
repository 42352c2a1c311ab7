//! Competing-risks trial simulation.
//!
//! Bivariate exponential event times coupled through a Gumbel-Hougaard copula
//! are generated per simulated trial, a cause-specific Cox model and a
//! Fine-Gray subdistribution model are fitted to each trial, and the results
//! are aggregated over a grid of scenarios.
//!
//! - [`copula`]: scenario parameters, copula sampling and trial generation.
//! - [`estimators`]: Cox and Fine-Gray partial-likelihood fits, Kaplan-Meier
//!   and Aalen-Johansen estimators.
//! - [`sim`]: replication, per-scenario aggregation and grid execution.
//! - [`reporting`]: results CSV and SVG figures.

pub mod copula;
pub mod error;
pub mod estimators;
pub mod reporting;
pub mod sim;

pub use copula::{Arm, Cause, Scenario, Subject, TrialData};
pub use error::{Error, Result};
pub use estimators::{FitFailure, FitResult, StepFunction};
pub use sim::{Engine, RepRecord, ScenarioGrid, ScenarioSummary};
