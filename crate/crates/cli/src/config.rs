//! Run configuration: a TOML file, overridden by flags or `CRSIM_*`
//! environment variables.
//!
//! ```toml
//! output_dir = "results"
//! workers = 4
//!
//! [grid]
//! alphas = [1.0, 1.2, 1.5, 2.0]
//! lambda2s = [0.005, 0.008, 0.01, 0.02, 0.03, 0.05]
//! theta2s = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5]
//! lambda1 = 0.035
//! theta1 = 0.8
//! n_subjects = 500
//! censor_lo = 3.0
//! censor_hi = 5.0
//! n_reps = 2000
//! master_seed = 20240601
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use crsim::ScenarioGrid;
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const DEFAULT_OUTPUT_DIR: &str = "results";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: ScenarioGrid,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from(DEFAULT_OUTPUT_DIR)
}

fn default_workers() -> usize {
    1
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { grid: ScenarioGrid::default(), output_dir: default_output_dir(), workers: default_workers() }
    }
}

/// Command-line (or environment) values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub reps: Option<usize>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::usage(format!("invalid configuration: {e}")))
    }

    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Failure::usage(format!("cannot read configuration {}: {e}", p.display())))?;
                Self::from_toml(&text).map_err(|f| Failure::usage(format!("{}: {}", p.display(), f.message)))
            }
        }
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(seed) = o.seed {
            self.grid.master_seed = seed;
        }
        if let Some(workers) = o.workers {
            self.workers = workers;
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
        if let Some(reps) = o.reps {
            self.grid.n_reps = reps;
        }
        self
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.workers == 0 {
            return Err(Failure::usage("workers must be at least 1"));
        }
        self.grid.validate().map_err(|e| Failure::usage(format!("invalid configuration: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn partial_grid_keeps_defaults() {
        let c = RunConfig::from_toml("workers = 3\n[grid]\nn_reps = 10\nalphas = [1.0]\n").unwrap();
        assert_eq!(c.workers, 3);
        assert_eq!(c.grid.n_reps, 10);
        assert_eq!(c.grid.alphas, vec![1.0]);
        assert_eq!(c.grid.lambda2s.len(), 6);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("wokers = 3\n").is_err());
        assert!(RunConfig::from_toml("[grid]\nalpha = [1.0]\n").is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let c = RunConfig::from_toml("workers = 3\n[grid]\nn_reps = 10\n").unwrap().apply(&Overrides {
            seed: Some(9),
            workers: None,
            out: Some("x".into()),
            reps: Some(4),
        });
        assert_eq!((c.grid.master_seed, c.workers, c.grid.n_reps), (9, 3, 4));
        assert_eq!(c.output_dir, PathBuf::from("x"));
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::default();
        c.workers = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.grid.alphas = vec![0.5];
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }
}
