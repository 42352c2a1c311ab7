use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crsim::estimators::{fit_cox, fit_fine_gray, Z_975};
use crsim::reporting::{
    format_sig6, read_results_csv, render_bias_plot, render_estimate_plot, write_results_csv, BiasModel, PanelPolicy,
};
use crsim::{Cause, Engine, FitResult, ScenarioSummary, TrialData};
use serde::Serialize;

use crate::config::{Overrides, RunConfig};
use crate::dataset::read_dataset;
use crate::{Failure, ModelChoice};

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    master_seed: u64,
    workers: usize,
    n_cells: usize,
    results: &'static str,
    grid: &'a crsim::ScenarioGrid,
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))
}

pub fn simulate(config_path: Option<&Path>, overrides: &Overrides) -> Result<(), Failure> {
    let config = RunConfig::load(config_path)?.apply(overrides);
    config.validate()?;
    let engine = Engine::new(config.workers)?;

    let mut stderr = io::stderr().lock();
    let summaries = engine.run_grid_with_progress(&config.grid, |done, total, s| {
        let _ = writeln!(
            stderr,
            "[{done}/{total}] alpha={} lambda2={} theta2={}  HR cox={} fg={}",
            format_sig6(s.alpha),
            format_sig6(s.lambda2),
            format_sig6(s.theta2),
            format_sig6(s.mean_hr_cox),
            format_sig6(s.mean_hr_fg),
        );
    })?;
    drop(stderr);

    create_dir(&config.output_dir)?;
    let results = config.output_dir.join(RESULTS_FILE);
    write_results_csv(&summaries, &results)?;

    let manifest = Manifest {
        tool: "crsim",
        version: env!("CARGO_PKG_VERSION"),
        master_seed: config.grid.master_seed,
        workers: config.workers,
        n_cells: summaries.len(),
        results: RESULTS_FILE,
        grid: &config.grid,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let manifest_path = config.output_dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, json + "\n")
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", manifest_path.display())))?;

    let degraded = summaries.iter().filter(|s| s.degraded).count();
    if degraded > 0 {
        eprintln!("warning: {degraded} cell(s) had more than 10% failed fits");
    }
    println!("wrote {} cells to {}", summaries.len(), results.display());
    Ok(())
}

#[derive(Serialize)]
struct FitReport {
    model: &'static str,
    converged: bool,
    log_hr: Option<f64>,
    hr: Option<f64>,
    se_log_hr: Option<f64>,
    ci_lower: Option<f64>,
    ci_upper: Option<f64>,
    iterations: usize,
    failure: Option<String>,
}

impl FitReport {
    fn new(model: &'static str, fit: &FitResult) -> Self {
        let finite = |x: f64| x.is_finite().then_some(x);
        let (lo, hi) = fit.wald_ci_log();
        FitReport {
            model,
            converged: fit.converged,
            log_hr: finite(fit.log_hr),
            hr: finite(fit.hazard_ratio()),
            se_log_hr: finite(fit.se_log_hr),
            ci_lower: finite(lo.exp()).filter(|_| fit.converged),
            ci_upper: finite(hi.exp()).filter(|_| fit.converged),
            iterations: fit.iterations,
            failure: fit.failure.map(|f| f.to_string()),
        }
    }
}

#[derive(Serialize)]
struct Counts {
    subjects: usize,
    primary: usize,
    competing: usize,
    censored: usize,
}

#[derive(Serialize)]
struct FitOutput {
    counts: Counts,
    fits: Vec<FitReport>,
}

fn print_fit_table(out: &FitOutput) {
    let c = &out.counts;
    println!("subjects {}  primary {}  competing {}  censored {}", c.subjects, c.primary, c.competing, c.censored);
    println!("{:<10} {:>10} {:>10} {:>10} {:>22}  status", "model", "HR", "log HR", "SE", "95% CI (HR)");
    let num = |x: Option<f64>| x.map_or_else(|| "-".to_string(), format_sig6);
    for f in &out.fits {
        let ci = match (f.ci_lower, f.ci_upper) {
            (Some(lo), Some(hi)) => format!("[{}, {}]", format_sig6(lo), format_sig6(hi)),
            _ => "-".into(),
        };
        let status = match &f.failure {
            None => format!("converged in {} iterations", f.iterations),
            Some(why) => format!("FAILED: {why}"),
        };
        println!(
            "{:<10} {:>10} {:>10} {:>10} {:>22}  {status}",
            f.model,
            num(f.hr),
            num(f.log_hr),
            num(f.se_log_hr),
            ci
        );
    }
}

pub fn fit(dataset: &Path, model: ModelChoice, json: bool) -> Result<(), Failure> {
    let data: TrialData = read_dataset(dataset)?;
    let mut fits = Vec::new();
    if matches!(model, ModelChoice::Cox | ModelChoice::Both) {
        fits.push(FitReport::new("cox", &fit_cox(&data)));
    }
    if matches!(model, ModelChoice::Finegray | ModelChoice::Both) {
        fits.push(FitReport::new("fine-gray", &fit_fine_gray(&data)));
    }
    let out = FitOutput {
        counts: Counts {
            subjects: data.len(),
            primary: data.count(Cause::Primary),
            competing: data.count(Cause::Competing),
            censored: data.count(Cause::Censored),
        },
        fits,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&out).expect("fit output serializes"));
    } else {
        print_fit_table(&out);
        println!("(Wald interval, z = {})", format_sig6(Z_975));
    }
    let failed: Vec<String> =
        out.fits.iter().filter_map(|f| f.failure.as_ref().map(|why| format!("{}: {why}", f.model))).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::not_converged(format!("model did not converge ({})", failed.join("; "))))
    }
}

pub fn summarize(results: &Path) -> Result<(), Failure> {
    let summaries = read_results_csv(results)?;
    print!("{}", summary_table(&summaries));
    Ok(())
}

fn summary_table(summaries: &[ScenarioSummary]) -> String {
    let mut s = format!(
        "{:>5} {:>7} {:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>8} {:>7} {:>7}\n",
        "alpha", "lambda2", "theta2", "HR cox", "HR fg", "gap", "bias cox", "bias fg", "cover", "conv", "reps"
    );
    for c in summaries {
        let flag = if c.degraded { "  degraded" } else { "" };
        s.push_str(&format!(
            "{:>5} {:>7} {:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8.3} {:>7} {:>7}{flag}\n",
            format_sig6(c.alpha),
            format_sig6(c.lambda2),
            format_sig6(c.theta2),
            c.mean_hr_cox,
            c.mean_hr_fg,
            c.mean_gap,
            c.bias_cox,
            c.bias_fg,
            c.coverage_cox,
            c.n_converged_cox,
            c.n_reps_total,
        ));
    }
    s
}

/// `estimate_alpha_1.svg`, `estimate_alpha_1.2.svg`, ...
pub fn estimate_plot_name(alpha: f64) -> String {
    format!("estimate_alpha_{}.svg", format_sig6(alpha))
}

pub fn plot(results: &Path, out_dir: &Path, allow_partial: bool) -> Result<(), Failure> {
    let summaries = read_results_csv(results)?;
    let mut alphas: Vec<f64> = summaries.iter().map(|s| s.alpha).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let policy = if allow_partial { PanelPolicy::AllowPartial } else { PanelPolicy::Strict };
    if policy == PanelPolicy::Strict && alphas.len() != crsim::reporting::STRICT_BIAS_PANELS {
        return Err(Failure::usage(format!(
            "{}: expected {} alpha levels, found {} (use --allow-partial)",
            results.display(),
            crsim::reporting::STRICT_BIAS_PANELS,
            alphas.len()
        )));
    }

    create_dir(out_dir)?;
    let mut written = Vec::new();
    for &alpha in &alphas {
        let path = out_dir.join(estimate_plot_name(alpha));
        render_estimate_plot(&summaries, alpha, &path)?;
        written.push(path);
    }
    for (model, name) in [(BiasModel::Cox, "bias_cox.svg"), (BiasModel::FineGray, "bias_finegray.svg")] {
        let path = out_dir.join(name);
        render_bias_plot(&summaries, model, policy, &path)?;
        written.push(path);
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_names() {
        assert_eq!(estimate_plot_name(1.0), "estimate_alpha_1.svg");
        assert_eq!(estimate_plot_name(1.2), "estimate_alpha_1.2.svg");
    }
}
