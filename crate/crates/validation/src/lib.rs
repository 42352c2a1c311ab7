//! Brute-force reference implementations used as test oracles. Nothing here
//! calls into the estimator code under test.

use crsim::{Arm, Cause, Subject, TrialData};

pub fn data(rows: &[(f64, u8, u8)]) -> TrialData {
    TrialData::new(
        rows.iter()
            .map(|&(t, c, z)| Subject::new(t, Cause::from_code(c).unwrap(), Arm::from_indicator(z).unwrap()))
            .collect(),
    )
    .unwrap()
}

fn z(s: &Subject) -> f64 {
    if s.arm == Arm::Treatment {
        1.0
    } else {
        0.0
    }
}

/// Censoring survival just before `t`: product over censoring times `u < t`
/// of `1 - (#censored at u) / (#with time >= u)`.
pub fn naive_g_left(subjects: &[Subject], t: f64) -> f64 {
    let mut times: Vec<f64> =
        subjects.iter().filter(|s| s.cause == Cause::Censored && s.time < t).map(|s| s.time).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut g = 1.0;
    for u in times {
        let d = subjects.iter().filter(|s| s.cause == Cause::Censored && s.time == u).count() as f64;
        let n = subjects.iter().filter(|s| s.time >= u).count() as f64;
        g *= 1.0 - d / n;
    }
    g
}

/// Cause-specific Cox log partial likelihood, Breslow ties, one term per
/// primary event with the risk set `{j : T_j >= T_i}`.
pub fn naive_cox_loglik(data: &TrialData, beta: f64) -> f64 {
    let s = data.subjects();
    let mut ll = 0.0;
    for i in s.iter().filter(|i| i.cause == Cause::Primary) {
        let denom: f64 = s.iter().filter(|j| j.time >= i.time).map(|j| (beta * z(j)).exp()).sum();
        ll += beta * z(i) - denom.ln();
    }
    ll
}

/// Fine-Gray weighted log partial likelihood: competing subjects with
/// `T_j < T_i` stay in the risk set with weight `G(T_i-) / G(T_j-)`.
pub fn naive_fg_loglik(data: &TrialData, beta: f64) -> f64 {
    let s = data.subjects();
    let mut ll = 0.0;
    for i in s.iter().filter(|i| i.cause == Cause::Primary) {
        let gi = naive_g_left(s, i.time);
        let mut denom = 0.0;
        for j in s {
            let w = if j.time >= i.time {
                1.0
            } else if j.cause == Cause::Competing {
                gi / naive_g_left(s, j.time)
            } else {
                0.0
            };
            denom += w * (beta * z(j)).exp();
        }
        ll += beta * z(i) - denom.ln();
    }
    ll
}

/// Maximizer of `f` by scanning: step 1e-3 over `[-10, 10]` to bracket, then
/// step 1e-7 over the bracket.
pub fn grid_argmax(f: impl Fn(f64) -> f64) -> f64 {
    let scan = |lo: f64, step: f64, n: usize| {
        let mut best = (lo, f64::NEG_INFINITY);
        for k in 0..=n {
            let b = lo + k as f64 * step;
            let v = f(b);
            if v > best.1 {
                best = (b, v);
            }
        }
        best.0
    };
    let coarse = scan(-10.0, 1e-3, 20_000);
    scan(coarse - 2e-3, 1e-7, 40_000)
}

/// Product-limit survival of an event set, evaluated at `t` (right-continuous).
pub fn naive_km(subjects: &[Subject], is_event: impl Fn(Cause) -> bool, t: f64) -> f64 {
    let mut times: Vec<f64> = subjects.iter().filter(|s| is_event(s.cause) && s.time <= t).map(|s| s.time).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times.iter().fold(1.0, |acc, &u| {
        let d = subjects.iter().filter(|s| is_event(s.cause) && s.time == u).count() as f64;
        let n = subjects.iter().filter(|s| s.time >= u).count() as f64;
        acc * (1.0 - d / n)
    })
}

/// Kendall's tau for continuous data by counting discordant pairs with a
/// merge sort, O(n log n).
pub fn kendall_tau(pairs: &[(f64, f64)]) -> f64 {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ys: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let n = ys.len();
    let discordant = count_inversions(&mut ys);
    let total = (n * (n - 1) / 2) as f64;
    (total - 2.0 * discordant as f64) / total
}

fn count_inversions(v: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = count_inversions(&mut v[..mid]) + count_inversions(&mut v[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if v[i] <= v[j] {
            merged.push(v[i]);
            i += 1;
        } else {
            merged.push(v[j]);
            count += (mid - i) as u64;
            j += 1;
        }
    }
    merged.extend_from_slice(&v[i..mid]);
    merged.extend_from_slice(&v[j..]);
    v.copy_from_slice(&merged);
    count
}

/// Small fixtures with finite maximizers. The first is the 6-subject Cox
/// fixture, the second the 8-subject fixture with two competing events.
/// Rows are `(time, cause, arm)`.
pub fn oracle_fixtures() -> Vec<(&'static str, TrialData)> {
    vec![
        ("six subjects", data(&[(1.0, 1, 1), (2.5, 2, 1), (4.0, 1, 1), (1.8, 1, 0), (3.0, 1, 0), (3.5, 0, 0)])),
        (
            "eight subjects, two competing",
            data(&[
                (0.7, 2, 1),
                (1.2, 1, 1),
                (2.9, 1, 1),
                (4.1, 0, 1),
                (0.9, 1, 0),
                (1.6, 2, 0),
                (2.2, 0, 0),
                (3.3, 1, 0),
            ]),
        ),
        (
            "tied times",
            data(&[(1.0, 1, 1), (2.0, 1, 1), (3.0, 0, 1), (1.0, 1, 0), (2.0, 2, 0), (2.0, 1, 0), (4.0, 1, 0)]),
        ),
        (
            "ten subjects, early censoring",
            data(&[
                (0.3, 0, 1),
                (0.8, 1, 1),
                (1.1, 2, 1),
                (2.4, 1, 1),
                (3.9, 0, 1),
                (0.5, 0, 0),
                (0.6, 1, 0),
                (1.4, 1, 0),
                (2.0, 2, 0),
                (2.7, 1, 0),
            ]),
        ),
        (
            "nine subjects, competing then censoring",
            data(&[
                (0.4, 2, 0),
                (0.9, 1, 1),
                (1.3, 0, 0),
                (1.7, 1, 0),
                (2.1, 2, 1),
                (2.6, 1, 1),
                (3.0, 0, 1),
                (3.4, 1, 0),
                (4.2, 1, 1),
            ]),
        ),
    ]
}
