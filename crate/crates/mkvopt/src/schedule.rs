//! Step-size schedules for the Euler-Maruyama loop.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Sequence of positive time steps. Constant by default; an explicit
/// per-iteration sequence is accepted for decreasing-step experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    dts: Vec<f64>,
}

pub const DEFAULT_DT: f64 = 0.1;

impl StepSchedule {
    pub fn constant(dt: f64, n_iters: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "step size must be positive and finite, got {dt}"
            )));
        }
        Ok(Self {
            dts: vec![dt; n_iters],
        })
    }

    pub fn from_steps(dts: Vec<f64>) -> Result<Self> {
        if let Some(bad) = dts.iter().find(|dt| !(**dt > 0.0) || !dt.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "all step sizes must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { dts })
    }

    pub fn n_iters(&self) -> usize {
        self.dts.len()
    }

    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.dts.iter().copied()
    }
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self::constant(DEFAULT_DT, 300).expect("default schedule is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_schedule() {
        let s = StepSchedule::constant(0.1, 3).unwrap();
        assert_eq!(s.n_iters(), 3);
        assert!(s.steps().all(|dt| dt == 0.1));
    }

    #[test]
    fn rejects_nonpositive_steps() {
        assert!(StepSchedule::constant(0.0, 5).is_err());
        assert!(StepSchedule::from_steps(vec![0.1, -0.2]).is_err());
        assert!(StepSchedule::from_steps(vec![f64::NAN]).is_err());
    }

    #[test]
    fn empty_schedule_is_valid() {
        // n_iters = 0 runs no steps; the trace then only holds the initial best
        assert_eq!(StepSchedule::constant(0.1, 0).unwrap().n_iters(), 0);
    }
}
