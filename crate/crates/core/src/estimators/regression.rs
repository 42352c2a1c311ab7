use super::nonparametric::{km_censoring, time_groups};
use super::{FitFailure, FitResult};
use crate::copula::{Arm, TrialData};

/// Convergence threshold on the absolute score.
pub const ABS_SCORE_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 50;
pub const MAX_HALVINGS: usize = 20;
/// Iterates beyond this magnitude are treated as separation.
pub const MAX_ABS_LOG_HR: f64 = 15.0;

/// One distinct primary-event time: event counts and the (weighted) size of
/// the risk set, both split by arm (index 0 = control, 1 = treatment).
#[derive(Debug, Clone, Copy)]
struct RiskTerm {
    events: [f64; 2],
    weight: [f64; 2],
}

/// Log partial likelihood, score and observed information at one `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodEval {
    pub loglik: f64,
    pub score: f64,
    pub information: f64,
}

/// A (weighted) log partial likelihood in the treatment log hazard ratio,
/// reduced to per-event-time sufficient statistics.
///
/// Per event time with arm weights `w0, w1` and arm event counts `d0, d1`
/// the contribution is `d1 beta - (d0 + d1) ln(w0 + w1 e^beta)`. It is
/// evaluated in the arm-symmetric form `c = w0 e^(-beta/2)`,
/// `t = w1 e^(beta/2)`, which makes relabelling the arms negate the estimate
/// bit for bit.
#[derive(Debug, Clone)]
pub struct PartialLikelihood {
    terms: Vec<RiskTerm>,
    events_by_arm: [usize; 2],
}

impl PartialLikelihood {
    /// Cause-specific Cox likelihood: primary events are events, competing
    /// events and censoring both end follow-up.
    pub fn cox(data: &TrialData) -> Self {
        let mut events_by_arm = [0usize; 2];
        let terms = time_groups(data)
            .into_iter()
            .filter(|g| g.primary[0] + g.primary[1] > 0)
            .map(|g| {
                events_by_arm[0] += g.primary[0];
                events_by_arm[1] += g.primary[1];
                RiskTerm {
                    events: [g.primary[0] as f64, g.primary[1] as f64],
                    weight: [g.at_risk[0] as f64, g.at_risk[1] as f64],
                }
            })
            .collect();
        PartialLikelihood { terms, events_by_arm }
    }

    /// Fine-Gray subdistribution likelihood.
    ///
    /// Subjects still under observation at `t` have weight 1. A subject whose
    /// competing event happened at `T_i < t` stays in the risk set with weight
    /// `G(t-) / G(T_i-)`, where `G` is the Kaplan-Meier censoring survival.
    /// When `G(t-)` is zero the last positive value is used instead.
    pub fn fine_gray(data: &TrialData) -> Self {
        let g_hat = km_censoring(data);
        let mut events_by_arm = [0usize; 2];
        let mut inverse_weight_sum = [0.0f64; 2];
        let mut terms = Vec::new();
        for g in time_groups(data) {
            let g_left = g_hat.eval_left_positive(g.time);
            if g.primary[0] + g.primary[1] > 0 {
                events_by_arm[0] += g.primary[0];
                events_by_arm[1] += g.primary[1];
                terms.push(RiskTerm {
                    events: [g.primary[0] as f64, g.primary[1] as f64],
                    weight: [
                        g.at_risk[0] as f64 + g_left * inverse_weight_sum[0],
                        g.at_risk[1] as f64 + g_left * inverse_weight_sum[1],
                    ],
                });
            }
            for (sum, &k) in inverse_weight_sum.iter_mut().zip(&g.competing) {
                *sum += k as f64 / g_left;
            }
        }
        PartialLikelihood { terms, events_by_arm }
    }

    pub fn n_events(&self) -> usize {
        self.events_by_arm[0] + self.events_by_arm[1]
    }

    pub fn eval(&self, beta: f64) -> LikelihoodEval {
        let half = 0.5 * beta;
        let (down, up) = ((-half).exp(), half.exp());
        let mut loglik = 0.0;
        let mut score = 0.0;
        let mut information = 0.0;
        for term in &self.terms {
            let [d0, d1] = term.events;
            let c = term.weight[0] * down;
            let t = term.weight[1] * up;
            let s = c + t;
            let d = d0 + d1;
            loglik += ((d1 - d0) * 0.5) * beta - d * s.ln();
            score += (d1 * c - d0 * t) / s;
            information += d * (c * t) / (s * s);
        }
        LikelihoodEval { loglik, score, information }
    }
}

fn failed(lik: &PartialLikelihood, log_hr: f64, iterations: usize, failure: FitFailure) -> FitResult {
    FitResult {
        log_hr,
        se_log_hr: f64::NAN,
        n_primary_events: lik.n_events(),
        converged: false,
        iterations,
        failure: Some(failure),
    }
}

/// Maximizes `lik` by Newton-Raphson from `beta = 0`.
///
/// Stops when `|score| < ABS_SCORE_TOL`. A step that lowers the likelihood is
/// halved up to `MAX_HALVINGS` times. Datasets with no events, or with every
/// event in one arm, are reported as failures without iterating.
pub fn newton_raphson(lik: &PartialLikelihood) -> FitResult {
    match lik.events_by_arm {
        [0, 0] => return failed(lik, f64::NAN, 0, FitFailure::NoPrimaryEvents),
        [_, 0] => return failed(lik, f64::NEG_INFINITY, 0, FitFailure::EventsInOneArm(Arm::Control)),
        [0, _] => return failed(lik, f64::INFINITY, 0, FitFailure::EventsInOneArm(Arm::Treatment)),
        _ => {}
    }

    let mut beta = 0.0;
    let mut current = lik.eval(beta);
    for iteration in 0..=MAX_ITERATIONS {
        if !(current.information > 0.0 && current.information.is_finite()) {
            return failed(lik, beta, iteration, FitFailure::NonPositiveInformation);
        }
        if current.score.abs() < ABS_SCORE_TOL {
            return FitResult {
                log_hr: beta,
                se_log_hr: current.information.sqrt().recip(),
                n_primary_events: lik.n_events(),
                converged: true,
                iterations: iteration,
                failure: None,
            };
        }
        if iteration == MAX_ITERATIONS {
            break;
        }

        let floor = current.loglik - 1e-12 * (1.0 + current.loglik.abs());
        let mut step = current.score / current.information;
        let mut candidate = beta + step;
        let mut next = lik.eval(candidate);
        let mut halvings = 0;
        while !(next.loglik >= floor) {
            if halvings == MAX_HALVINGS {
                return failed(lik, beta, iteration, FitFailure::StepHalvingExhausted);
            }
            step *= 0.5;
            candidate = beta + step;
            next = lik.eval(candidate);
            halvings += 1;
        }
        beta = candidate;
        current = next;
        if beta.abs() > MAX_ABS_LOG_HR {
            return failed(lik, beta, iteration + 1, FitFailure::Diverged);
        }
    }
    failed(lik, beta, MAX_ITERATIONS, FitFailure::MaxIterations)
}

/// Cox proportional-hazards fit for the primary event, treating competing
/// events as censored.
pub fn fit_cox(data: &TrialData) -> FitResult {
    newton_raphson(&PartialLikelihood::cox(data))
}

/// Fine-Gray subdistribution-hazard fit for the primary event.
///
/// The standard error is the model-based inverse information of the weighted
/// likelihood; it ignores the variability of the estimated censoring weights.
pub fn fit_fine_gray(data: &TrialData) -> FitResult {
    newton_raphson(&PartialLikelihood::fine_gray(data))
}
