use super::step::StepFunction;
use crate::copula::{Cause, TrialData};
use crate::error::{Error, Result};

/// Subjects sharing one observed time, counted by cause and arm
/// (index 0 = control, 1 = treatment).
#[derive(Debug, Clone, Copy)]
pub(crate) struct TimeGroup {
    pub time: f64,
    /// Subjects with observed time `>= time`.
    pub at_risk: [usize; 2],
    pub primary: [usize; 2],
    pub competing: [usize; 2],
    pub censored: [usize; 2],
}

impl TimeGroup {
    pub fn total_at_risk(&self) -> usize {
        self.at_risk[0] + self.at_risk[1]
    }

    pub fn count(&self, cause: Cause) -> usize {
        let c = match cause {
            Cause::Primary => self.primary,
            Cause::Competing => self.competing,
            Cause::Censored => self.censored,
        };
        c[0] + c[1]
    }
}

/// Distinct observed times in increasing order with their at-risk sets.
pub(crate) fn time_groups(data: &TrialData) -> Vec<TimeGroup> {
    let mut order: Vec<(f64, Cause, usize)> =
        data.subjects().iter().map(|s| (s.time, s.cause, s.arm.indicator() as usize)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut remaining = [0usize; 2];
    for &(_, _, z) in &order {
        remaining[z] += 1;
    }

    let mut groups: Vec<TimeGroup> = Vec::new();
    for &(time, cause, z) in &order {
        if groups.last().is_none_or(|g| g.time != time) {
            groups.push(TimeGroup { time, at_risk: remaining, primary: [0; 2], competing: [0; 2], censored: [0; 2] });
        }
        let g = groups.last_mut().expect("group pushed above");
        match cause {
            Cause::Primary => g.primary[z] += 1,
            Cause::Competing => g.competing[z] += 1,
            Cause::Censored => g.censored[z] += 1,
        }
        remaining[z] -= 1;
    }
    groups
}

fn product_limit(groups: &[TimeGroup], is_event: impl Fn(&TimeGroup) -> usize) -> StepFunction {
    let mut jumps = Vec::new();
    let mut values = vec![1.0];
    let mut surv = 1.0;
    for g in groups {
        let d = is_event(g);
        if d > 0 {
            surv *= 1.0 - d as f64 / g.total_at_risk() as f64;
            jumps.push(g.time);
            values.push(surv);
        }
    }
    StepFunction::new(jumps, values).expect("group times are strictly increasing")
}

/// Kaplan-Meier estimate of the censoring-time survival `G(t)`.
///
/// Censored records are the events here; primary and competing events censor
/// the censoring time.
pub fn km_censoring(data: &TrialData) -> StepFunction {
    product_limit(&time_groups(data), |g| g.count(Cause::Censored))
}

/// All-cause Kaplan-Meier survival, with either event type as the event.
pub fn km_survival(data: &TrialData) -> StepFunction {
    product_limit(&time_groups(data), |g| g.count(Cause::Primary) + g.count(Cause::Competing))
}

/// Aalen-Johansen cumulative incidence of `cause`:
/// `CIF(t) = sum over event times t_j <= t of S(t_j-) d_j / n_j`, with `S` the
/// all-cause Kaplan-Meier survival.
pub fn aalen_johansen(data: &TrialData, cause: Cause) -> Result<StepFunction> {
    if cause == Cause::Censored {
        return Err(Error::InvalidArgument(
            "cumulative incidence is defined for primary or competing events only".into(),
        ));
    }
    let mut jumps = Vec::new();
    let mut values = vec![0.0];
    let mut surv = 1.0;
    let mut cif = 0.0;
    for g in time_groups(data) {
        let n = g.total_at_risk() as f64;
        let d_cause = g.count(cause);
        let d_all = g.count(Cause::Primary) + g.count(Cause::Competing);
        if d_cause > 0 {
            cif += surv * d_cause as f64 / n;
            jumps.push(g.time);
            values.push(cif);
        }
        if d_all > 0 {
            surv *= 1.0 - d_all as f64 / n;
        }
    }
    StepFunction::new(jumps, values)
}
