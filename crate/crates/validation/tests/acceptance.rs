//! Acceptance criteria. Runs the full default grid twice (one worker and
//! four workers), prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use crsim::copula::{generate_trial, kendall_tau_from_alpha, sample_gumbel_pair, sample_latent};
use crsim::estimators::{aalen_johansen, fit_cox, fit_fine_gray, km_survival};
use crsim::reporting::{render_bias_plot, render_estimate_plot, write_results_csv, BiasModel, PanelPolicy};
use crsim::{Arm, Cause, Engine, Scenario, ScenarioGrid, ScenarioSummary, Subject, TrialData};
use crsim_validation::{grid_argmax, kendall_tau, naive_cox_loglik, naive_fg_loglik, oracle_fixtures};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

const HR_TOL: f64 = 0.02;
const TRUE_HR: f64 = 0.80;
const COVERAGE_RANGE: (f64, f64) = (0.935, 0.965);
const TAU_TOL: f64 = 0.02;
const COPULA_DRAWS: usize = 100_000;

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn report(id: &'static str, pass: bool, detail: String) -> Outcome {
    println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass, detail }
}

fn cell(s: &ScenarioSummary) -> String {
    format!("(alpha {}, lambda2 {}, theta2 {})", s.alpha, s.lambda2, s.theta2)
}

fn find(grid: &[ScenarioSummary], alpha: f64, lambda2: f64, theta2: f64) -> &ScenarioSummary {
    grid.iter()
        .find(|s| s.alpha == alpha && s.lambda2 == lambda2 && (s.theta2 - theta2).abs() < 1e-9)
        .expect("default grid cell")
}

fn worst<'a>(
    cells: impl Iterator<Item = &'a ScenarioSummary>,
    f: impl Fn(&ScenarioSummary) -> f64,
) -> (f64, Option<&'a ScenarioSummary>) {
    cells.fold((0.0, None), |acc, s| if f(s) > acc.0 || acc.1.is_none() { (f(s), Some(s)) } else { acc })
}

fn concordance(grid: &[ScenarioSummary]) -> Outcome {
    let cells: Vec<_> = grid
        .iter()
        .filter(|s| s.lambda2 <= 0.02 && [0.7, 0.8, 0.9, 1.0].iter().any(|t| (s.theta2 - t).abs() < 1e-9))
        .collect();
    let (max, at) = worst(cells.iter().copied(), |s| (s.mean_hr_cox - s.mean_hr_fg).abs());
    // Four alphas, four lambda2 values at or below 0.02, four theta2 values.
    report(
        "C1 concordance",
        cells.len() == 64 && max < HR_TOL,
        format!(
            "max |mean_hr_cox - mean_hr_fg| = {max:.4} at {} over {} cells (tol {HR_TOL})",
            cell(at.unwrap()),
            cells.len()
        ),
    )
}

fn independence(grid: &[ScenarioSummary]) -> Outcome {
    let cells: Vec<_> = grid.iter().filter(|s| s.alpha == 1.0).collect();
    let dev = |s: &ScenarioSummary| (s.mean_hr_cox - TRUE_HR).abs().max((s.mean_hr_fg - TRUE_HR).abs());
    let (max, at) = worst(cells.iter().copied(), dev);
    let failing = cells.iter().filter(|s| dev(s) >= HR_TOL).count();
    let geo = |s: &ScenarioSummary| {
        let (c, f) = s.geometric_mean_hr();
        (c - TRUE_HR).abs().max((f - TRUE_HR).abs())
    };
    let (geo_max, geo_at) = worst(cells.iter().copied(), geo);
    let at = at.unwrap();
    report(
        "C2 independence recovery",
        failing == 0,
        format!(
            "{failing}/{} alpha-1 cells outside 0.80 +/- {HR_TOL}; worst deviation {max:.4} at {} (cox {:.4}, fg {:.4}); \
             on exp(mean log HR) worst deviation {geo_max:.4} at {}",
            cells.len(),
            cell(at),
            at.mean_hr_cox,
            at.mean_hr_fg,
            cell(geo_at.unwrap())
        ),
    )
}

fn bias_valley(grid: &[ScenarioSummary]) -> Outcome {
    let centre: Vec<_> = grid.iter().filter(|s| (s.theta2 - 0.8).abs() < 1e-9).collect();
    let size = |s: &ScenarioSummary| s.bias_cox.abs().max(s.bias_fg.abs());
    let (max, at) = worst(centre.iter().copied(), size);
    let near_zero = centre.iter().filter(|s| size(s) >= HR_TOL).count();
    let (geo_max, _) = worst(centre.iter().copied(), |s| {
        let (c, f) = s.geometric_mean_hr();
        (c - TRUE_HR).abs().max((f - TRUE_HR).abs())
    });

    let mut ordering_violations = Vec::new();
    for &alpha in &ScenarioGrid::default().alphas {
        for &lambda2 in &ScenarioGrid::default().lambda2s {
            let mid = find(grid, alpha, lambda2, 0.8);
            let lo = find(grid, alpha, lambda2, 0.5);
            let hi = find(grid, alpha, lambda2, 1.5);
            let by_model: [(&str, fn(&ScenarioSummary) -> f64); 2] =
                [("cox", |s| s.bias_cox.abs()), ("fg", |s| s.bias_fg.abs())];
            for (model, b) in by_model {
                if b(mid) > b(lo) || b(mid) > b(hi) {
                    ordering_violations.push(format!(
                        "{model} (alpha {alpha}, lambda2 {lambda2}): |bias| 0.5/0.8/1.5 = {:.4}/{:.4}/{:.4}",
                        b(lo),
                        b(mid),
                        b(hi)
                    ));
                }
            }
        }
    }
    let mut detail = format!(
        "{near_zero}/{} theta2=0.8 cells with |bias| >= {HR_TOL} (worst {max:.4} at {}; on exp(mean log HR) worst {geo_max:.4}); \
         {} ordering violations of 48",
        centre.len(),
        cell(at.unwrap()),
        ordering_violations.len()
    );
    if let Some(first) = ordering_violations.first() {
        detail.push_str(&format!(", e.g. {first}"));
    }
    report("C3 bias valley", near_zero == 0 && ordering_violations.is_empty(), detail)
}

fn divergence(grid: &[ScenarioSummary]) -> Outcome {
    let high = find(grid, 2.0, 0.05, 1.5).mean_gap;
    let low = find(grid, 2.0, 0.005, 1.5).mean_gap;
    report(
        "C4 divergence monotonicity",
        high > low,
        format!("mean_gap at (alpha 2, theta2 1.5): lambda2 0.05 -> {high:.4}, lambda2 0.005 -> {low:.4}"),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut max_delta: f64 = 0.0;
    let mut all_converged = true;
    let fixtures = oracle_fixtures();
    for (_, d) in &fixtures {
        let (cox, fg) = (fit_cox(d), fit_fine_gray(d));
        all_converged &= cox.converged && fg.converged;
        max_delta = max_delta.max((cox.log_hr - grid_argmax(|b| naive_cox_loglik(d, b))).abs());
        max_delta = max_delta.max((fg.log_hr - grid_argmax(|b| naive_fg_loglik(d, b))).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let max_n = fixtures.iter().map(|(_, d)| d.len()).max().unwrap_or(0);
    report(
        "C5 oracle equivalence",
        all_converged && fixtures.len() >= 5 && max_n <= 10 && max_delta < 1e-6 && elapsed < 1.0,
        format!("{} fixtures (<= {max_n} subjects), max |delta beta| = {max_delta:.2e} (tol 1e-6), {elapsed:.3} s (limit 1 s)", fixtures.len()),
    )
}

fn copula() -> Outcome {
    let mut tau_dev: f64 = 0.0;
    let mut taus = Vec::new();
    for (i, alpha) in [1.0, 1.2, 1.5, 2.0].into_iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(1000 + i as u64);
        let pairs: Vec<(f64, f64)> = (0..COPULA_DRAWS).map(|_| sample_gumbel_pair(alpha, &mut rng).unwrap()).collect();
        let tau = kendall_tau(&pairs);
        tau_dev = tau_dev.max((tau - kendall_tau_from_alpha(alpha).unwrap()).abs());
        taus.push(format!("{tau:.4}"));
    }

    let s = Scenario::with_defaults(2.0, 0.05, 1.2).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(2000);
    let control: Vec<(f64, f64)> = (0..COPULA_DRAWS)
        .map(|_| sample_latent(&s, &mut rng))
        .filter(|d| d.0 == Arm::Control)
        .map(|d| (d.1, d.2))
        .collect();
    let n = control.len() as f64;
    let mut worst_z: f64 = 0.0;
    for a in [5.0, 15.0, 30.0] {
        for b in [3.0, 10.0, 25.0] {
            let p = (-((s.lambda1 * a).powf(s.alpha) + (s.lambda2 * b).powf(s.alpha)).powf(1.0 / s.alpha)).exp();
            let got = control.iter().filter(|&&(x, y)| x > a && y > b).count() as f64 / n;
            worst_z = worst_z.max((got - p).abs() / (p * (1.0 - p) / n).sqrt());
        }
    }
    report(
        "C6 copula",
        tau_dev < TAU_TOL && worst_z <= 3.0,
        format!(
            "tau at alpha 1/1.2/1.5/2 = {} (max dev {tau_dev:.4}, tol {TAU_TOL}); joint survival 3x3 worst |z| = {worst_z:.2} (limit 3)",
            taus.join("/")
        ),
    )
}

fn without_competing(d: &TrialData) -> TrialData {
    let rows = d
        .subjects()
        .iter()
        .map(|s| Subject::new(s.time, if s.cause == Cause::Competing { Cause::Censored } else { s.cause }, s.arm))
        .collect();
    TrialData::new(rows).unwrap()
}

fn identities() -> Outcome {
    let mut datasets: Vec<TrialData> = oracle_fixtures().into_iter().map(|(_, d)| d).collect();
    for (alpha, lambda2, theta2) in [(1.0, 0.05, 0.5), (2.0, 0.05, 1.5), (1.5, 0.01, 0.8)] {
        let s = Scenario::with_defaults(alpha, lambda2, theta2).unwrap();
        datasets.extend((0..5).map(|r| generate_trial(&s, r)));
    }
    let (mut reduction, mut aj, mut scale) = (0.0f64, 0.0f64, 0.0f64);
    let mut swap_exact = true;
    for d in &datasets {
        let plain = without_competing(d);
        reduction = reduction.max((fit_cox(&plain).log_hr - fit_fine_gray(&plain).log_hr).abs());

        let s_hat = km_survival(d);
        let cif1 = aalen_johansen(d, Cause::Primary).unwrap();
        let cif2 = aalen_johansen(d, Cause::Competing).unwrap();
        for x in d.subjects() {
            aj = aj.max((s_hat.eval(x.time) + cif1.eval(x.time) + cif2.eval(x.time) - 1.0).abs());
        }

        let scaled = d.with_scaled_times(12.0).unwrap();
        let swapped = d.with_swapped_arms();
        for (fit, on_scaled, on_swapped) in [
            (fit_cox(d), fit_cox(&scaled), fit_cox(&swapped)),
            (fit_fine_gray(d), fit_fine_gray(&scaled), fit_fine_gray(&swapped)),
        ] {
            scale = scale.max((fit.log_hr - on_scaled.log_hr).abs());
            swap_exact &= fit.log_hr == -on_swapped.log_hr;
        }
    }
    report(
        "C7 estimator identities",
        reduction <= 1e-10 && aj <= 1e-12 && scale <= 1e-12 && swap_exact,
        format!(
            "{} datasets: FG vs Cox without competing {reduction:.1e} (tol 1e-10); AJ identity {aj:.1e} (tol 1e-12); \
             time scale {scale:.1e} (tol 1e-12); label swap exact negation: {swap_exact}",
            datasets.len()
        ),
    )
}

fn coverage(grid: &[ScenarioSummary]) -> Outcome {
    let c = find(grid, 1.0, 0.01, 0.8).coverage_cox;
    report(
        "C8 Cox coverage",
        (COVERAGE_RANGE.0..=COVERAGE_RANGE.1).contains(&c),
        format!(
            "coverage at (alpha 1, lambda2 0.01, theta2 0.8) = {c:.4} (range [{}, {}])",
            COVERAGE_RANGE.0, COVERAGE_RANGE.1
        ),
    )
}

fn convergence_audit(grid: &[ScenarioSummary]) -> Outcome {
    let low: Vec<_> = grid.iter().filter(|s| (s.n_converged_cox as f64) < 0.9 * s.n_reps_total as f64).collect();
    let min = grid.iter().map(|s| s.n_converged_cox).min().unwrap_or(0);
    let degraded = grid.iter().filter(|s| s.degraded).count();
    report(
        "grid convergence audit",
        low.is_empty(),
        format!("{} cells below 90% Cox convergence; min converged {min}; {degraded} degraded cells", low.len()),
    )
}

fn write_outputs(grid: &[ScenarioSummary], dir: &Path) {
    write_results_csv(grid, dir.join("results.csv")).unwrap();
    for alpha in [1.0, 1.2, 1.5, 2.0] {
        render_estimate_plot(grid, alpha, dir.join(format!("estimate_alpha_{alpha}.svg"))).unwrap();
    }
    render_bias_plot(grid, BiasModel::Cox, PanelPolicy::Strict, dir.join("bias_cox.svg")).unwrap();
    render_bias_plot(grid, BiasModel::FineGray, PanelPolicy::Strict, dir.join("bias_finegray.svg")).unwrap();
}

fn determinism(a: &[ScenarioSummary], b: &[ScenarioSummary]) -> Outcome {
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_outputs(a, da.path());
    write_outputs(b, db.path());
    let mut names: Vec<_> = fs::read_dir(da.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    let differing: Vec<String> = names
        .iter()
        .filter(|n| fs::read(da.path().join(n)).unwrap() != fs::read(db.path().join(n)).ok().unwrap_or_default())
        .map(|n| n.to_string_lossy().into_owned())
        .collect();
    report(
        "C9 determinism",
        a.len() == 264 && names.len() == 7 && differing.is_empty(),
        format!(
            "{} cells; {} files compared between 1-worker and 4-worker runs; differing: {}",
            a.len(),
            names.len(),
            if differing.is_empty() { "none".to_string() } else { differing.join(", ") }
        ),
    )
}

fn main() -> ExitCode {
    let grid = ScenarioGrid::default();
    println!(
        "acceptance: default grid, {} cells x {} reps, n = {}, seed {}",
        grid.len(),
        grid.n_reps,
        grid.n_subjects,
        grid.master_seed
    );
    let mut outcomes = vec![oracle_equivalence(), copula(), identities()];

    let start = Instant::now();
    let serial = Engine::new(1).unwrap().run_grid(&grid).expect("default grid runs");
    println!("grid run with 1 worker: {:.1} s", start.elapsed().as_secs_f64());
    let start = Instant::now();
    let parallel = Engine::new(4).unwrap().run_grid(&grid).expect("default grid runs");
    println!("grid run with 4 workers: {:.1} s", start.elapsed().as_secs_f64());

    outcomes.extend([
        concordance(&serial),
        independence(&serial),
        bias_valley(&serial),
        divergence(&serial),
        coverage(&serial),
        convergence_audit(&serial),
        determinism(&serial, &parallel),
    ]);
    outcomes.sort_by_key(|o| o.id);

    let failed: Vec<&Outcome> = outcomes.iter().filter(|o| !o.pass).collect();
    println!();
    println!("acceptance summary: {} passed, {} failed", outcomes.len() - failed.len(), failed.len());
    for o in &outcomes {
        println!("  {} {}", if o.pass { "PASS" } else { "FAIL" }, o.id);
    }
    for o in &failed {
        eprintln!("failed: {}: {}", o.id, o.detail);
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
