use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::harness::Evaluator;
use crate::task::TaskSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub threads: u32,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFailure {
    pub threads: u32,
    pub message: String,
}

/// Median runtimes per thread count, ascending. `partial` is set when some
/// thread count failed; those counts are listed in `failures`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCurve {
    pub task_id: String,
    pub points: Vec<ScalingPoint>,
    pub partial: bool,
    pub failures: Vec<ScalingFailure>,
}

impl ScalingCurve {
    pub fn base_point(&self) -> Option<&ScalingPoint> {
        self.points.first().filter(|p| p.threads == 1)
    }

    /// T(1) / T(t) for every measured point; empty without a 1-thread point.
    pub fn speedups(&self) -> Vec<(u32, f64)> {
        let Some(base) = self.base_point() else {
            return Vec::new();
        };
        self.points
            .iter()
            .map(|p| (p.threads, base.runtime_secs / p.runtime_secs))
            .collect()
    }
}

/// Sweeps the thread counts in ascending order, one at a time, with
/// `measure` returning the median runtime at a given count.
pub fn strong_scaling<F>(task_id: &str, thread_counts: &[u32], mut measure: F) -> Result<ScalingCurve, MetricsError>
where
    F: FnMut(u32) -> Result<Duration, String>,
{
    let mut counts = thread_counts.to_vec();
    counts.sort_unstable();
    counts.dedup();
    if counts.first() != Some(&1) {
        return Err(MetricsError::Invalid("thread counts must include 1".into()));
    }
    let mut curve = ScalingCurve {
        task_id: task_id.to_string(),
        points: Vec::new(),
        partial: false,
        failures: Vec::new(),
    };
    for t in counts {
        match measure(t) {
            Ok(d) if !d.is_zero() => curve.points.push(ScalingPoint {
                threads: t,
                runtime_secs: d.as_secs_f64(),
            }),
            Ok(_) => curve.failures.push(ScalingFailure {
                threads: t,
                message: "zero runtime".into(),
            }),
            Err(message) => curve.failures.push(ScalingFailure { threads: t, message }),
        }
    }
    curve.partial = !curve.failures.is_empty();
    Ok(curve)
}

/// [`strong_scaling`] through the evaluation harness.
pub fn measure_scaling(
    evaluator: &dyn Evaluator,
    task: &TaskSpec,
    source: &str,
    thread_counts: &[u32],
) -> Result<ScalingCurve, MetricsError> {
    strong_scaling(&task.id, thread_counts, |t| {
        evaluator.measure(source, task, t).map_err(|e| e.to_string())
    })
}
