//! Candidate evaluation: compile, test, race-check, time.
//!
//! [`SubprocessEvaluator`] drives real toolchains; [`StubEvaluator`] reads
//! scripted verdicts out of the source text so the search loop and the corpus
//! pipelines can run deterministically without a compiler.

mod exec;
mod stub;
mod subprocess;

use std::sync::{Condvar, Mutex};
use std::time::Duration;

pub use exec::{execute, ExecError, ExecRequest, ExecutionResult, ExitKind};
pub use stub::StubEvaluator;
pub use subprocess::{outputs_match, SubprocessEvaluator};

use crate::report::EvaluationReport;
use crate::task::{Candidate, TaskSpec};

/// Which stages past build + tests to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stages {
    /// Build and unit tests only (the corpus acceptance gate).
    Correctness,
    /// Adds the sanitizer run.
    RaceCheck,
    /// Adds the timed runs that produce T(x).
    Full,
}

impl Stages {
    pub fn race(self) -> bool {
        !matches!(self, Stages::Correctness)
    }

    pub fn timing(self) -> bool {
        matches!(self, Stages::Full)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("toolchain command not found: {0}")]
    ToolchainMissing(String),
    #[error("sandbox setup failed: {0}")]
    Sandbox(String),
    #[error("{0}")]
    Exec(#[from] ExecError),
    #[error("timing run failed: {0}")]
    Timing(String),
    #[error("candidate does not build: {0}")]
    Build(String),
}

pub trait Evaluator: Send + Sync {
    /// Runs the staged pipeline. Infrastructure problems come back as
    /// [`EvaluationReport::infra`] reports, never as candidate failures.
    fn evaluate(&self, candidate: &Candidate, task: &TaskSpec, stages: Stages) -> EvaluationReport;

    /// Median wall time of `source` on the task's timing input with the
    /// given thread count.
    fn measure(&self, source: &str, task: &TaskSpec, threads: u32) -> Result<Duration, HarnessError>;
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn evaluate(&self, candidate: &Candidate, task: &TaskSpec, stages: Stages) -> EvaluationReport {
        (**self).evaluate(candidate, task, stages)
    }

    fn measure(&self, source: &str, task: &TaskSpec, threads: u32) -> Result<Duration, HarnessError> {
        (**self).measure(source, task, threads)
    }
}

impl<E: Evaluator + ?Sized> Evaluator for Box<E> {
    fn evaluate(&self, candidate: &Candidate, task: &TaskSpec, stages: Stages) -> EvaluationReport {
        (**self).evaluate(candidate, task, stages)
    }

    fn measure(&self, source: &str, task: &TaskSpec, threads: u32) -> Result<Duration, HarnessError> {
        (**self).measure(source, task, threads)
    }
}

/// Median of a non-empty sample; the lower-middle element for even counts
/// is averaged with the upper one.
pub fn median(samples: &[Duration]) -> Option<Duration> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort();
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2
    })
}

/// Runs `run_once` `repetitions` times and returns the median. Any failing
/// repetition invalidates the whole measurement.
pub fn measure_with<F>(repetitions: u32, mut run_once: F) -> Result<Duration, HarnessError>
where
    F: FnMut() -> Result<Duration, HarnessError>,
{
    let samples = (0..repetitions.max(1))
        .map(|_| run_once())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(median(&samples).expect("at least one repetition"))
}

/// Counting gate bounding how many evaluations run at once.
#[derive(Debug)]
pub struct AdmissionGate {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

pub struct Admission<'a> {
    gate: &'a AdmissionGate,
}

impl AdmissionGate {
    pub fn new(limit: usize) -> Self {
        AdmissionGate {
            limit: limit.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn enter(&self) -> Admission<'_> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *active >= self.limit {
            active = self.freed.wait(active).unwrap_or_else(|e| e.into_inner());
        }
        *active += 1;
        Admission { gate: self }
    }
}

impl Drop for Admission<'_> {
    fn drop(&mut self) {
        let mut active = self.gate.active.lock().unwrap_or_else(|e| e.into_inner());
        *active -= 1;
        self.gate.freed.notify_one();
    }
}
