use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::report::{EvaluationReport, RaceOutcome, TestOutcome};

/// Default ε added to the runtime before inversion, in seconds.
pub const DEFAULT_EPSILON_SECS: f64 = 1e-9;

/// Inverse runtime in 1/s, or exactly zero for anything that failed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FitnessScore(f64);

impl FitnessScore {
    pub const ZERO: FitnessScore = FitnessScore(0.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0.0
    }

    /// Wraps a stored value; rejects negatives and non-finite numbers.
    pub fn from_stored(value: f64) -> Option<FitnessScore> {
        (value.is_finite() && value >= 0.0).then_some(FitnessScore(value))
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for FitnessScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitnessError {
    #[error("epsilon must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("report {0} passed every stage but carries no runtime")]
    MissingRuntime(String),
    #[error("report {0} passed tests but was never race-checked")]
    NotRaceChecked(String),
}

/// f = 0 when the candidate failed to build, failed or timed out in tests,
/// or was flagged by the race detector; otherwise 1 / (T + ε).
pub fn compute_fitness(report: &EvaluationReport, epsilon_secs: f64) -> Result<FitnessScore, FitnessError> {
    if !(epsilon_secs.is_finite() && epsilon_secs > 0.0) {
        return Err(FitnessError::Epsilon(epsilon_secs));
    }
    if report.is_infra() || !report.passed_tests() {
        return Ok(FitnessScore::ZERO);
    }
    debug_assert_eq!(report.tests, TestOutcome::Passed);
    match report.race {
        RaceOutcome::RaceDetected { .. } | RaceOutcome::DeadlockSuspected { .. } => Ok(FitnessScore::ZERO),
        RaceOutcome::Skipped => Err(FitnessError::NotRaceChecked(report.candidate_id.to_string())),
        RaceOutcome::Clean => match report.runtime {
            Some(t) => Ok(FitnessScore(1.0 / (t.as_secs_f64() + epsilon_secs))),
            None => Err(FitnessError::MissingRuntime(report.candidate_id.to_string())),
        },
    }
}
