//! Trial data generation.
//!
//! Latent event times `(T1, T2)` have exponential margins with rates
//! `lambda1 * theta1^z` and `lambda2 * theta2^z` and are coupled through a
//! Gumbel-Hougaard copula, so that
//!
//! ```text
//! P(T1 > t1, T2 > t2 | Z = z) = exp(-[(theta1^z lambda1 t1)^alpha + (theta2^z lambda2 t2)^alpha]^(1/alpha))
//! ```
//!
//! Each subject is randomized by a fair coin, followed up until a
//! `Uniform(censor_lo, censor_hi)` administrative censoring time, and
//! observed at whichever of primary event, competing event or censoring
//! happens first.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Treatment arm of a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    Control,
    Treatment,
}

impl Arm {
    /// Covariate value `z`: 1 for treatment, 0 for control.
    pub fn indicator(self) -> u8 {
        match self {
            Arm::Control => 0,
            Arm::Treatment => 1,
        }
    }

    pub fn from_indicator(z: u8) -> Option<Arm> {
        match z {
            0 => Some(Arm::Control),
            1 => Some(Arm::Treatment),
            _ => None,
        }
    }

    pub fn swapped(self) -> Arm {
        match self {
            Arm::Control => Arm::Treatment,
            Arm::Treatment => Arm::Control,
        }
    }
}

/// Observed outcome of a subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cause {
    Primary,
    Competing,
    Censored,
}

impl Cause {
    /// File coding: 1 = primary, 2 = competing, 0 = censored.
    pub fn code(self) -> u8 {
        match self {
            Cause::Censored => 0,
            Cause::Primary => 1,
            Cause::Competing => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Cause> {
        match code {
            0 => Some(Cause::Censored),
            1 => Some(Cause::Primary),
            2 => Some(Cause::Competing),
            _ => None,
        }
    }
}

/// One cell of the simulation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Gumbel-Hougaard dependence parameter, `>= 1`.
    pub alpha: f64,
    /// Baseline primary-event rate per patient-year.
    pub lambda1: f64,
    /// Baseline competing-event rate per patient-year.
    pub lambda2: f64,
    /// Treatment hazard ratio on the primary event.
    pub theta1: f64,
    /// Treatment hazard ratio on the competing event.
    pub theta2: f64,
    pub n_subjects: usize,
    /// Administrative censoring window in years.
    pub censor_lo: f64,
    pub censor_hi: f64,
    pub n_reps: usize,
    pub master_seed: u64,
}

impl Scenario {
    pub const DEFAULT_LAMBDA1: f64 = 0.035;
    pub const DEFAULT_THETA1: f64 = 0.80;
    pub const DEFAULT_N_SUBJECTS: usize = 500;
    pub const DEFAULT_CENSOR_WINDOW: (f64, f64) = (3.0, 5.0);
    pub const DEFAULT_N_REPS: usize = 2000;
    pub const DEFAULT_SEED: u64 = 20_240_601;

    /// A scenario with the default trial design and the given varying parameters.
    pub fn with_defaults(alpha: f64, lambda2: f64, theta2: f64) -> Result<Self> {
        let s = Scenario {
            alpha,
            lambda1: Self::DEFAULT_LAMBDA1,
            lambda2,
            theta1: Self::DEFAULT_THETA1,
            theta2,
            n_subjects: Self::DEFAULT_N_SUBJECTS,
            censor_lo: Self::DEFAULT_CENSOR_WINDOW.0,
            censor_hi: Self::DEFAULT_CENSOR_WINDOW.1,
            n_reps: Self::DEFAULT_N_REPS,
            master_seed: Self::DEFAULT_SEED,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::AlphaDomain(self.alpha));
        }
        let positive = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("censor_lo", self.censor_lo),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidScenario(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.censor_hi >= self.censor_lo && self.censor_hi.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "censoring window must satisfy censor_lo <= censor_hi, got ({}, {})",
                self.censor_lo, self.censor_hi
            )));
        }
        if self.n_subjects == 0 {
            return Err(Error::InvalidScenario("n_subjects must be positive".into()));
        }
        if self.n_reps == 0 {
            return Err(Error::InvalidScenario("n_reps must be positive".into()));
        }
        Ok(())
    }

    pub fn kendall_tau(&self) -> f64 {
        1.0 - 1.0 / self.alpha
    }
}

/// One subject's observed follow-up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subject {
    /// Observed time in years, `> 0`.
    pub time: f64,
    pub cause: Cause,
    pub arm: Arm,
}

impl Subject {
    pub fn new(time: f64, cause: Cause, arm: Arm) -> Self {
        Subject { time, cause, arm }
    }
}

/// One simulated (or loaded) trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    subjects: Vec<Subject>,
}

impl TrialData {
    /// Rejects empty datasets and non-positive or non-finite times.
    pub fn new(subjects: Vec<Subject>) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::InvalidData("dataset has no subjects".into()));
        }
        if let Some((i, s)) = subjects.iter().enumerate().find(|(_, s)| !(s.time > 0.0 && s.time.is_finite())) {
            return Err(Error::InvalidData(format!(
                "subject {i} has invalid time {}; times must be positive and finite",
                s.time
            )));
        }
        Ok(TrialData { subjects })
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    pub fn count(&self, cause: Cause) -> usize {
        self.subjects.iter().filter(|s| s.cause == cause).count()
    }

    /// Same subjects with treatment and control exchanged.
    pub fn with_swapped_arms(&self) -> TrialData {
        TrialData { subjects: self.subjects.iter().map(|s| Subject { arm: s.arm.swapped(), ..*s }).collect() }
    }

    /// Same subjects with every time multiplied by `factor > 0`.
    pub fn with_scaled_times(&self, factor: f64) -> Result<TrialData> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("time scale must be positive, got {factor}")));
        }
        TrialData::new(self.subjects.iter().map(|s| Subject { time: s.time * factor, ..*s }).collect())
    }
}

/// Kendall's tau of the Gumbel-Hougaard copula, `1 - 1/alpha`.
pub fn kendall_tau_from_alpha(alpha: f64) -> Result<f64> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::AlphaDomain(alpha));
    }
    Ok(1.0 - 1.0 / alpha)
}

/// Uniform draw on the open interval (0, 1); exact zeros are redrawn.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -open_unit(rng).ln()
}

/// Positive stable variable with Laplace transform `exp(-s^index)`,
/// `0 < index < 1`, by the Chambers-Mallows-Stuck (Kanter) representation.
fn positive_stable<R: Rng + ?Sized>(index: f64, rng: &mut R) -> f64 {
    let angle = PI * open_unit(rng);
    let w = unit_exponential(rng);
    let head = (index * angle).sin() / angle.sin().powf(1.0 / index);
    let tail = (((1.0 - index) * angle).sin() / w).powf((1.0 - index) / index);
    head * tail
}

fn gumbel_pair_unchecked<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> (f64, f64) {
    if alpha == 1.0 {
        return (open_unit(rng), open_unit(rng));
    }
    let index = 1.0 / alpha;
    loop {
        let s = positive_stable(index, rng);
        let e1 = unit_exponential(rng);
        let e2 = unit_exponential(rng);
        let u1 = (-(e1 / s).powf(index)).exp();
        let u2 = (-(e2 / s).powf(index)).exp();
        if u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0 {
            return (u1, u2);
        }
    }
}

/// Draws `(u1, u2)` from the Gumbel-Hougaard copula
/// `C(u, v) = exp(-[(-ln u)^alpha + (-ln v)^alpha]^(1/alpha))`.
///
/// Marshall-Olkin frailty construction: with `S` positive stable of index
/// `1/alpha` and `E1, E2` unit exponentials, `u_i = exp(-(E_i / S)^(1/alpha))`.
/// `alpha == 1` returns independent uniforms. Both values lie strictly inside
/// (0, 1); boundary values are redrawn.
pub fn sample_gumbel_pair<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> Result<(f64, f64)> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::AlphaDomain(alpha));
    }
    Ok(gumbel_pair_unchecked(alpha, rng))
}

/// Inverse-CDF transform of copula uniforms to latent exponential event times.
pub fn transform_to_event_times(u1: f64, u2: f64, scenario: &Scenario, arm: Arm) -> (f64, f64) {
    debug_assert!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0);
    let (rate1, rate2) = match arm {
        Arm::Control => (scenario.lambda1, scenario.lambda2),
        Arm::Treatment => (scenario.lambda1 * scenario.theta1, scenario.lambda2 * scenario.theta2),
    };
    (-u1.ln() / rate1, -u2.ln() / rate2)
}

/// Observed outcome from latent times and censoring time: primary if `t1`
/// comes strictly first, else competing if `t2 < c`, else censored at `c`.
pub fn observe(t1: f64, t2: f64, censor: f64) -> (f64, Cause) {
    if t1 < t2.min(censor) {
        (t1, Cause::Primary)
    } else if t2 < censor {
        (t2, Cause::Competing)
    } else {
        (censor, Cause::Censored)
    }
}

/// Draws a subject's arm and latent event times `(arm, t1, t2)`.
pub fn sample_latent<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> (Arm, f64, f64) {
    let arm = if rng.random_bool(0.5) { Arm::Treatment } else { Arm::Control };
    let (u1, u2) = gumbel_pair_unchecked(scenario.alpha, rng);
    let (t1, t2) = transform_to_event_times(u1, u2, scenario, arm);
    (arm, t1, t2)
}

const STREAM_DOMAIN: &[u8] = b"crsim/replication-stream/v1";

/// 256-bit stream seed for one replication.
///
/// SHA-256 over a domain tag, the master seed, the bit patterns of every
/// scenario field that affects the generated data (`alpha`, `lambda1`,
/// `lambda2`, `theta1`, `theta2`, `n_subjects`, `censor_lo`, `censor_hi`),
/// and the replication index, all fixed-width little-endian. `n_reps` is not
/// part of the identity, so growing a run leaves earlier replications
/// unchanged.
pub fn replication_seed(scenario: &Scenario, rep_index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(STREAM_DOMAIN);
    h.update(scenario.master_seed.to_le_bytes());
    for v in [scenario.alpha, scenario.lambda1, scenario.lambda2, scenario.theta1, scenario.theta2] {
        h.update(v.to_bits().to_le_bytes());
    }
    h.update((scenario.n_subjects as u64).to_le_bytes());
    h.update(scenario.censor_lo.to_bits().to_le_bytes());
    h.update(scenario.censor_hi.to_bits().to_le_bytes());
    h.update(rep_index.to_le_bytes());
    h.finalize().into()
}

pub fn replication_rng(scenario: &Scenario, rep_index: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(replication_seed(scenario, rep_index))
}

/// Generates replication `rep_index` of `scenario`.
///
/// Per subject, in order: arm, copula pair, censoring time. The result depends
/// only on `(scenario, rep_index)`.
pub fn generate_trial(scenario: &Scenario, rep_index: u64) -> TrialData {
    debug_assert!(scenario.validate().is_ok());
    let mut rng = replication_rng(scenario, rep_index);
    let width = scenario.censor_hi - scenario.censor_lo;
    let subjects = (0..scenario.n_subjects)
        .map(|_| {
            let (arm, t1, t2) = sample_latent(scenario, &mut rng);
            let censor = scenario.censor_lo + width * rng.random::<f64>();
            let (time, cause) = observe(t1, t2, censor);
            Subject { time, cause, arm }
        })
        .collect();
    TrialData { subjects }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario() -> Scenario {
        Scenario::with_defaults(1.5, 0.01, 1.0).unwrap()
    }

    #[test]
    fn tau_matches_quoted_values() {
        assert_eq!(kendall_tau_from_alpha(1.0).unwrap(), 0.0);
        assert!((kendall_tau_from_alpha(1.2).unwrap() - 0.167).abs() < 5e-4);
        assert!((kendall_tau_from_alpha(1.5).unwrap() - 0.333).abs() < 5e-4);
        assert_eq!(kendall_tau_from_alpha(2.0).unwrap(), 0.5);
    }

    #[test]
    fn alpha_below_one_is_rejected() {
        assert!(matches!(kendall_tau_from_alpha(0.9), Err(Error::AlphaDomain(_))));
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(matches!(sample_gumbel_pair(0.5, &mut rng), Err(Error::AlphaDomain(_))));
        assert!(Scenario::with_defaults(0.99, 0.01, 1.0).is_err());
        assert!(Scenario::with_defaults(f64::NAN, 0.01, 1.0).is_err());
    }

    #[test]
    fn scenario_validation() {
        let mut s = scenario();
        s.censor_lo = 6.0;
        assert!(s.validate().is_err());
        let mut s = scenario();
        s.lambda2 = 0.0;
        assert!(s.validate().is_err());
        let mut s = scenario();
        s.n_subjects = 0;
        assert!(s.validate().is_err());
        let mut s = scenario();
        s.censor_lo = 4.0;
        s.censor_hi = 4.0;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn event_time_transform() {
        let mut s = scenario();
        s.lambda1 = 1.0;
        s.theta1 = 0.5;
        let (t1, _) = transform_to_event_times((-1.0f64).exp(), 0.5, &s, Arm::Treatment);
        assert!((t1 - 2.0).abs() < 1e-12);

        let s = scenario();
        let (t1, _) = transform_to_event_times((-0.035f64).exp(), 0.5, &s, Arm::Control);
        assert!((t1 - 1.0).abs() < 1e-12);

        let mut unit = s;
        unit.theta1 = 1.0;
        unit.theta2 = 1.0;
        for &(u1, u2) in &[(0.1, 0.9), (0.5, 0.5), (0.99, 0.01)] {
            assert_eq!(
                transform_to_event_times(u1, u2, &s, Arm::Control),
                transform_to_event_times(u1, u2, &unit, Arm::Control)
            );
        }
    }

    #[test]
    fn outcome_rule() {
        assert_eq!(observe(1.2, 4.0, 3.5), (1.2, Cause::Primary));
        assert_eq!(observe(4.8, 2.0, 3.5), (2.0, Cause::Competing));
        assert_eq!(observe(6.0, 7.0, 3.1), (3.1, Cause::Censored));
    }

    #[test]
    fn generated_trials_are_reproducible_and_bounded() {
        let s = scenario();
        let a = generate_trial(&s, 7);
        let b = generate_trial(&s, 7);
        assert_eq!(a.len(), s.n_subjects);
        for (x, y) in a.subjects().iter().zip(b.subjects()) {
            assert_eq!(x.time.to_bits(), y.time.to_bits());
            assert_eq!((x.cause, x.arm), (y.cause, y.arm));
        }
        assert!(a.subjects().iter().all(|x| x.time > 0.0 && x.time <= s.censor_hi));
        assert_ne!(a, generate_trial(&s, 8));
    }

    #[test]
    fn stream_seed_depends_on_identity_not_rep_count() {
        let s = scenario();
        let mut more = s;
        more.n_reps = 10;
        assert_eq!(replication_seed(&s, 3), replication_seed(&more, 3));
        let mut other = s;
        other.theta2 = 1.1;
        assert_ne!(replication_seed(&s, 3), replication_seed(&other, 3));
        let mut reseeded = s;
        reseeded.master_seed += 1;
        assert_ne!(replication_seed(&s, 3), replication_seed(&reseeded, 3));
        assert_ne!(replication_seed(&s, 3), replication_seed(&s, 4));
    }

    #[test]
    fn positive_stable_laplace_transform() {
        // E[exp(-s S)] = exp(-s^index)
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let index = 1.0 / 1.5;
        let n = 200_000;
        for s in [0.5, 1.0, 2.0] {
            let mean: f64 = (0..n).map(|_| (-s * positive_stable(index, &mut rng)).exp()).sum::<f64>() / n as f64;
            let want = (-f64::powf(s, index)).exp();
            assert!((mean - want).abs() < 4e-3, "s={s}: {mean} vs {want}");
        }
    }

    #[test]
    fn trial_data_validation() {
        assert!(TrialData::new(vec![]).is_err());
        assert!(TrialData::new(vec![Subject::new(0.0, Cause::Primary, Arm::Control)]).is_err());
        assert!(TrialData::new(vec![Subject::new(f64::INFINITY, Cause::Primary, Arm::Control)]).is_err());
        let d = TrialData::new(vec![Subject::new(1.0, Cause::Primary, Arm::Control)]).unwrap();
        assert!(d.with_scaled_times(-1.0).is_err());
        assert_eq!(d.with_swapped_arms().subjects()[0].arm, Arm::Treatment);
    }

    #[test]
    fn codes_round_trip() {
        for c in [Cause::Primary, Cause::Competing, Cause::Censored] {
            assert_eq!(Cause::from_code(c.code()), Some(c));
        }
        assert_eq!(Cause::from_code(3), None);
        assert_eq!(Arm::from_indicator(2), None);
    }
}
