//! Regression fits and nonparametric estimators for competing-risks data.
//!
//! Both regression models use the single binary treatment covariate and are
//! fitted by Newton-Raphson on their (weighted) log partial likelihoods with
//! the Breslow convention for tied event times.

mod nonparametric;
mod regression;
mod step;

pub use nonparametric::{aalen_johansen, km_censoring, km_survival};
pub use regression::{
    fit_cox, fit_fine_gray, newton_raphson, LikelihoodEval, PartialLikelihood, ABS_SCORE_TOL, MAX_ABS_LOG_HR,
    MAX_HALVINGS, MAX_ITERATIONS,
};
pub use step::StepFunction;

use std::fmt;

use crate::copula::Arm;

/// Two-sided 97.5% standard normal quantile.
pub const Z_975: f64 = 1.959_963_984_540_054;

/// Why a fit did not produce a usable estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitFailure {
    NoPrimaryEvents,
    /// Every primary event occurred in this arm; the likelihood is monotone.
    EventsInOneArm(Arm),
    /// The iterate left `[-MAX_ABS_LOG_HR, MAX_ABS_LOG_HR]`.
    Diverged,
    MaxIterations,
    NonPositiveInformation,
    StepHalvingExhausted,
}

impl fmt::Display for FitFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitFailure::NoPrimaryEvents => write!(f, "no primary events"),
            FitFailure::EventsInOneArm(arm) => {
                write!(f, "all primary events in the {arm:?} arm (monotone likelihood)")
            }
            FitFailure::Diverged => {
                write!(f, "log hazard ratio exceeded +/-{MAX_ABS_LOG_HR} (separation)")
            }
            FitFailure::MaxIterations => {
                write!(f, "no convergence within {MAX_ITERATIONS} iterations")
            }
            FitFailure::NonPositiveInformation => write!(f, "observed information not positive"),
            FitFailure::StepHalvingExhausted => {
                write!(f, "likelihood did not increase after {MAX_HALVINGS} step halvings")
            }
        }
    }
}

/// Outcome of one regression fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// Estimated log hazard ratio (treatment vs control).
    pub log_hr: f64,
    /// `information^(-1/2)` at the estimate; NaN when not converged.
    pub se_log_hr: f64,
    pub n_primary_events: usize,
    pub converged: bool,
    pub iterations: usize,
    pub failure: Option<FitFailure>,
}

impl FitResult {
    pub fn hazard_ratio(&self) -> f64 {
        self.log_hr.exp()
    }

    /// Wald 95% interval on the log scale.
    pub fn wald_ci_log(&self) -> (f64, f64) {
        (self.log_hr - Z_975 * self.se_log_hr, self.log_hr + Z_975 * self.se_log_hr)
    }

    pub fn ci_contains_log(&self, log_value: f64) -> bool {
        let (lo, hi) = self.wald_ci_log();
        lo <= log_value && log_value <= hi
    }
}
