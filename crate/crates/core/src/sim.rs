//! Monte Carlo execution over scenarios and grids.
//!
//! Replications are independent work units run on a worker pool. Records are
//! collected in replication order and reduced sequentially, so summaries are
//! bitwise identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{generate_trial, Cause, Scenario};
use crate::error::{Error, Result};
use crate::estimators::{fit_cox, fit_fine_gray, FitResult};

/// Share of non-converged fits above which a cell is flagged degraded.
pub const DEGRADED_FAILURE_SHARE: f64 = 0.10;

/// Everything kept from one simulated trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepRecord {
    pub rep_index: u64,
    pub cox: FitResult,
    pub fine_gray: FitResult,
    pub n_primary: usize,
    pub n_competing: usize,
    pub n_censored: usize,
}

/// Generates replication `rep_index` of `scenario` and fits both models.
pub fn run_replication(scenario: &Scenario, rep_index: u64) -> RepRecord {
    let data = generate_trial(scenario, rep_index);
    RepRecord {
        rep_index,
        cox: fit_cox(&data),
        fine_gray: fit_fine_gray(&data),
        n_primary: data.count(Cause::Primary),
        n_competing: data.count(Cause::Competing),
        n_censored: data.count(Cause::Censored),
    }
}

/// Monte Carlo aggregates for one scenario.
///
/// Hazard-ratio means, biases and SDs are over converged fits of each model
/// separately; `mean_gap` is over replications where both converged.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub alpha: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub n_subjects: usize,
    pub n_reps_total: usize,
    pub n_converged_cox: usize,
    pub n_converged_fg: usize,
    /// Arithmetic mean of `exp(beta)`.
    pub mean_hr_cox: f64,
    pub mean_hr_fg: f64,
    /// Mean of `|HR_cox - HR_fg|` per replication.
    pub mean_gap: f64,
    /// `mean_hr - theta1`.
    pub bias_cox: f64,
    pub bias_fg: f64,
    /// Sample SD of `exp(beta)` across replications.
    pub emp_se_cox: f64,
    pub emp_se_fg: f64,
    /// Share of converged Cox fits whose Wald 95% interval covers `ln theta1`.
    pub coverage_cox: f64,
    pub mean_log_hr_cox: f64,
    pub mean_log_hr_fg: f64,
    pub mean_n_primary: f64,
    pub mean_n_competing: f64,
    pub mean_n_censored: f64,
    /// More than 10% of either model's fits failed.
    pub degraded: bool,
}

impl ScenarioSummary {
    /// Geometric-mean hazard ratios, `exp(mean beta)`.
    pub fn geometric_mean_hr(&self) -> (f64, f64) {
        (self.mean_log_hr_cox.exp(), self.mean_log_hr_fg.exp())
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Reduces replication records (in the given order) to a summary.
pub fn summarize(scenario: &Scenario, records: &[RepRecord]) -> ScenarioSummary {
    let converged = |pick: fn(&RepRecord) -> &FitResult| -> Vec<&FitResult> {
        records.iter().map(pick).filter(|f| f.converged).collect()
    };
    let cox = converged(|r| &r.cox);
    let fg = converged(|r| &r.fine_gray);

    let hr_cox: Vec<f64> = cox.iter().map(|f| f.hazard_ratio()).collect();
    let hr_fg: Vec<f64> = fg.iter().map(|f| f.hazard_ratio()).collect();
    let log_cox: Vec<f64> = cox.iter().map(|f| f.log_hr).collect();
    let log_fg: Vec<f64> = fg.iter().map(|f| f.log_hr).collect();
    let gaps: Vec<f64> = records
        .iter()
        .filter(|r| r.cox.converged && r.fine_gray.converged)
        .map(|r| (r.cox.hazard_ratio() - r.fine_gray.hazard_ratio()).abs())
        .collect();
    let target = scenario.theta1.ln();
    let covered = cox.iter().filter(|f| f.ci_contains_log(target)).count();
    let coverage_cox = if cox.is_empty() { f64::NAN } else { covered as f64 / cox.len() as f64 };

    let count_mean = |pick: fn(&RepRecord) -> usize| -> f64 {
        records.iter().map(|r| pick(r) as f64).sum::<f64>() / records.len().max(1) as f64
    };

    let n = records.len();
    let allowed_failures = DEGRADED_FAILURE_SHARE * n as f64;
    let degraded = (n - cox.len()) as f64 > allowed_failures || (n - fg.len()) as f64 > allowed_failures;

    let mean_hr_cox = mean(&hr_cox);
    let mean_hr_fg = mean(&hr_fg);
    ScenarioSummary {
        alpha: scenario.alpha,
        lambda1: scenario.lambda1,
        lambda2: scenario.lambda2,
        theta1: scenario.theta1,
        theta2: scenario.theta2,
        n_subjects: scenario.n_subjects,
        n_reps_total: n,
        n_converged_cox: cox.len(),
        n_converged_fg: fg.len(),
        mean_hr_cox,
        mean_hr_fg,
        mean_gap: mean(&gaps),
        bias_cox: mean_hr_cox - scenario.theta1,
        bias_fg: mean_hr_fg - scenario.theta1,
        emp_se_cox: sample_sd(&hr_cox),
        emp_se_fg: sample_sd(&hr_fg),
        coverage_cox,
        mean_log_hr_cox: mean(&log_cox),
        mean_log_hr_fg: mean(&log_fg),
        mean_n_primary: count_mean(|r| r.n_primary),
        mean_n_competing: count_mean(|r| r.n_competing),
        mean_n_censored: count_mean(|r| r.n_censored),
        degraded,
    }
}

/// The scenario grid: every combination of `alphas x lambda2s x theta2s`
/// with shared trial-design constants. Deserialization fills absent fields
/// from [`ScenarioGrid::default`] and rejects unknown ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioGrid {
    pub alphas: Vec<f64>,
    pub lambda2s: Vec<f64>,
    pub theta2s: Vec<f64>,
    pub lambda1: f64,
    pub theta1: f64,
    pub n_subjects: usize,
    pub censor_lo: f64,
    pub censor_hi: f64,
    pub n_reps: usize,
    pub master_seed: u64,
}

impl Default for ScenarioGrid {
    fn default() -> Self {
        ScenarioGrid {
            alphas: vec![1.0, 1.2, 1.5, 2.0],
            lambda2s: vec![0.005, 0.008, 0.01, 0.02, 0.03, 0.05],
            theta2s: Self::default_theta2s(),
            lambda1: Scenario::DEFAULT_LAMBDA1,
            theta1: Scenario::DEFAULT_THETA1,
            n_subjects: Scenario::DEFAULT_N_SUBJECTS,
            censor_lo: Scenario::DEFAULT_CENSOR_WINDOW.0,
            censor_hi: Scenario::DEFAULT_CENSOR_WINDOW.1,
            n_reps: Scenario::DEFAULT_N_REPS,
            master_seed: Scenario::DEFAULT_SEED,
        }
    }
}

impl ScenarioGrid {
    /// 0.5, 0.6, ..., 1.5, each the nearest double to its decimal.
    pub fn default_theta2s() -> Vec<f64> {
        (5..=15).map(|k| k as f64 / 10.0).collect()
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.lambda2s.len() * self.theta2s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in lexicographic order: alpha outermost, theta2 innermost.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let mut cells = Vec::with_capacity(self.len());
        for &alpha in &self.alphas {
            for &lambda2 in &self.lambda2s {
                for &theta2 in &self.theta2s {
                    cells.push(Scenario {
                        alpha,
                        lambda1: self.lambda1,
                        lambda2,
                        theta1: self.theta1,
                        theta2,
                        n_subjects: self.n_subjects,
                        censor_lo: self.censor_lo,
                        censor_hi: self.censor_hi,
                        n_reps: self.n_reps,
                        master_seed: self.master_seed,
                    });
                }
            }
        }
        cells
    }

    pub fn validate(&self) -> Result<()> {
        for (name, list) in [("alphas", &self.alphas), ("lambda2s", &self.lambda2s), ("theta2s", &self.theta2s)] {
            if list.is_empty() {
                return Err(Error::InvalidScenario(format!("{name} must not be empty")));
            }
        }
        self.scenarios().iter().try_for_each(Scenario::validate)
    }
}

/// Runs replications on a pool of `workers` threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Engine {
    workers: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Engine { workers: 1 }
    }
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::InvalidArgument("worker count must be at least 1".into()));
        }
        Ok(Engine { workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new().num_threads(self.workers).build().map_err(|e| Error::Pool(e.to_string()))
    }

    fn records_in(pool: &rayon::ThreadPool, scenario: &Scenario) -> Vec<RepRecord> {
        pool.install(|| (0..scenario.n_reps as u64).into_par_iter().map(|rep| run_replication(scenario, rep)).collect())
    }

    /// All replication records of `scenario`, in replication order.
    pub fn run_records(&self, scenario: &Scenario) -> Result<Vec<RepRecord>> {
        scenario.validate()?;
        Ok(Self::records_in(&self.pool()?, scenario))
    }

    pub fn run_scenario(&self, scenario: &Scenario) -> Result<ScenarioSummary> {
        let records = self.run_records(scenario)?;
        Ok(summarize(scenario, &records))
    }

    pub fn run_grid(&self, grid: &ScenarioGrid) -> Result<Vec<ScenarioSummary>> {
        self.run_grid_with_progress(grid, |_, _, _| {})
    }

    /// As [`Engine::run_grid`], calling `progress(done, total, summary)` after
    /// each cell.
    pub fn run_grid_with_progress(
        &self,
        grid: &ScenarioGrid,
        mut progress: impl FnMut(usize, usize, &ScenarioSummary),
    ) -> Result<Vec<ScenarioSummary>> {
        grid.validate()?;
        let pool = self.pool()?;
        let cells = grid.scenarios();
        let total = cells.len();
        let mut out = Vec::with_capacity(total);
        for (i, scenario) in cells.iter().enumerate() {
            let summary = summarize(scenario, &Self::records_in(&pool, scenario));
            progress(i + 1, total, &summary);
            out.push(summary);
        }
        Ok(out)
    }
}
