use crate::error::{Error, Result};

/// Right-continuous piecewise-constant function of time.
///
/// `values[0]` holds on `[0, jump_times[0])`, `values[k]` on
/// `[jump_times[k-1], jump_times[k])`, and the last value from the last jump on.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    jump_times: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(jump_times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != jump_times.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "step function needs {} values for {} jumps, got {}",
                jump_times.len() + 1,
                jump_times.len(),
                values.len()
            )));
        }
        if jump_times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("jump times must be strictly increasing".into()));
        }
        Ok(StepFunction { jump_times, values })
    }

    pub fn constant(value: f64) -> Self {
        StepFunction { jump_times: Vec::new(), values: vec![value] }
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    /// One value per interval, starting with the value before the first jump.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial_value(&self) -> f64 {
        self.values[0]
    }

    pub fn final_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `f(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        self.values[self.jump_times.partition_point(|&x| x <= t)]
    }

    /// `f(t-)`, the limit from the left.
    pub fn eval_left(&self, t: f64) -> f64 {
        self.values[self.jump_times.partition_point(|&x| x < t)]
    }

    /// `f(t-)`, or the last positive value before `t` when that is zero.
    pub(crate) fn eval_left_positive(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&x| x < t);
        self.values[..=k].iter().rev().copied().find(|&v| v > 0.0).unwrap_or(self.values[0])
    }

    pub fn is_non_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}
