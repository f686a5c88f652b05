//! Benchmark statistics: Build@1, Pass@1, Speedup@1, the cross-task expected
//! speedup, and strong-scaling sweeps.

mod emit;
mod scaling;
mod suite;

use serde::{Deserialize, Serialize};

use crate::par;

pub use emit::{emit_report, parse_report, render_report, BenchReport, Format, Summary};
pub use scaling::{measure_scaling, strong_scaling, ScalingCurve, ScalingFailure, ScalingPoint};
pub use suite::{evaluate_suite, load_suite, SuiteRun, SuiteTask};

/// One generated sample for one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub task_id: String,
    pub sample_index: usize,
    pub built: bool,
    pub passed: bool,
    pub runtime_secs: Option<f64>,
    pub baseline_secs: Option<f64>,
}

impl SampleOutcome {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let bad = |m: &str| {
            Err(MetricsError::Invalid(format!(
                "{}#{}: {m}",
                self.task_id, self.sample_index
            )))
        };
        if self.passed && !self.built {
            return bad("passed without building");
        }
        if self.runtime_secs.is_some() && !self.passed {
            return bad("runtime recorded for a failing sample");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("no samples")]
    Empty,
    #[error("sample {task_id}#{sample_index} passed but has no sequential baseline time")]
    MissingBaseline { task_id: String, sample_index: usize },
    #[error("sample {task_id}#{sample_index} passed but has no runtime")]
    MissingRuntime { task_id: String, sample_index: usize },
    #[error("{0}")]
    Invalid(String),
}

fn fraction(samples: &[SampleOutcome], pick: impl Fn(&SampleOutcome) -> bool) -> Result<f64, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(samples.iter().filter(|s| pick(s)).count() as f64 / samples.len() as f64)
}

pub fn build_at_1(samples: &[SampleOutcome]) -> Result<f64, MetricsError> {
    fraction(samples, |s| s.built)
}

pub fn pass_at_1(samples: &[SampleOutcome]) -> Result<f64, MetricsError> {
    fraction(samples, |s| s.passed)
}

/// Baseline time over sample time for passing samples, 0 otherwise. Not
/// clamped: a slower-than-baseline pass scores below 1.
pub fn speedup_at_1(sample: &SampleOutcome) -> Result<f64, MetricsError> {
    if !sample.passed {
        return Ok(0.0);
    }
    let base = sample.baseline_secs.ok_or_else(|| MetricsError::MissingBaseline {
        task_id: sample.task_id.clone(),
        sample_index: sample.sample_index,
    })?;
    let t = sample
        .runtime_secs
        .filter(|t| *t > 0.0)
        .ok_or_else(|| MetricsError::MissingRuntime {
            task_id: sample.task_id.clone(),
            sample_index: sample.sample_index,
        })?;
    Ok(base / t)
}

pub fn mean_speedup_at_1(samples: &[SampleOutcome]) -> Result<f64, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut total = 0.0;
    for s in samples {
        total += speedup_at_1(s)?;
    }
    Ok(total / samples.len() as f64)
}

/// Unweighted mean of per-task mean speedups.
pub fn expected_speedup(task_means: &[f64]) -> Result<f64, MetricsError> {
    if task_means.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(task_means.iter().sum::<f64>() / task_means.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub task: String,
    pub build_at_1: f64,
    pub pass_at_1: f64,
    pub mean_speedup_at_1: f64,
}

/// Groups samples by task (first-appearance order) and computes each task's
/// rates in parallel.
pub fn task_metrics(samples: &[SampleOutcome]) -> Result<Vec<TaskMetrics>, MetricsError> {
    for s in samples {
        s.validate()?;
    }
    let mut order: Vec<&str> = Vec::new();
    let mut groups: std::collections::HashMap<&str, Vec<SampleOutcome>> = Default::default();
    for s in samples {
        let g = groups.entry(s.task_id.as_str()).or_insert_with(|| {
            order.push(s.task_id.as_str());
            Vec::new()
        });
        g.push(s.clone());
    }
    let grouped: Vec<(&str, Vec<SampleOutcome>)> = order.iter().map(|t| (*t, groups.remove(t).unwrap())).collect();
    par::map(&grouped, |(task, group)| {
        Ok(TaskMetrics {
            task: task.to_string(),
            build_at_1: build_at_1(group)?,
            pass_at_1: pass_at_1(group)?,
            mean_speedup_at_1: mean_speedup_at_1(group)?,
        })
    })
    .into_iter()
    .collect()
}

/// Per-task rows plus the expected-speedup summary.
pub fn bench_report(samples: &[SampleOutcome]) -> Result<BenchReport, MetricsError> {
    let tasks = task_metrics(samples)?;
    Ok(BenchReport::new(tasks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(i: usize, built: bool, passed: bool, rt: Option<f64>, base: Option<f64>) -> SampleOutcome {
        SampleOutcome {
            task_id: "t".into(),
            sample_index: i,
            built,
            passed,
            runtime_secs: rt,
            baseline_secs: base,
        }
    }

    /// `n` samples, the first `built` of which build and the first `passed`
    /// of which pass.
    pub(crate) fn indicators(task: &str, n: usize, built: usize, passed: usize) -> Vec<SampleOutcome> {
        (0..n)
            .map(|i| SampleOutcome {
                task_id: task.into(),
                sample_index: i,
                built: i < built,
                passed: i < passed,
                runtime_secs: (i < passed).then_some(1.0),
                baseline_secs: Some(1.0),
            })
            .collect()
    }

    #[test]
    fn fractions() {
        let s: Vec<_> = [true, true, false, true]
            .iter()
            .enumerate()
            .map(|(i, b)| sample(i, *b, false, None, None))
            .collect();
        assert_eq!(build_at_1(&s).unwrap(), 0.75);
        assert_eq!(pass_at_1(&indicators("t", 4, 4, 1)).unwrap(), 0.25);
        assert_eq!(pass_at_1(&indicators("t", 3, 3, 3)).unwrap(), 1.0);
        assert_eq!(build_at_1(&indicators("t", 3, 0, 0)).unwrap(), 0.0);
        assert_eq!(build_at_1(&[]), Err(MetricsError::Empty));
    }

    #[test]
    fn graph_suite_cells() {
        let before = indicators("graph", 100, 62, 42);
        let after = indicators("graph", 100, 97, 76);
        assert_eq!(pass_at_1(&before).unwrap(), 0.42);
        assert_eq!(pass_at_1(&after).unwrap(), 0.76);
        assert_eq!(build_at_1(&before).unwrap(), 0.62);
        assert_eq!(build_at_1(&after).unwrap(), 0.97);
    }

    #[test]
    fn per_sample_speedup() {
        assert_eq!(
            speedup_at_1(&sample(0, true, true, Some(2.0), Some(10.0))).unwrap(),
            5.0
        );
        assert_eq!(speedup_at_1(&sample(0, true, false, None, Some(10.0))).unwrap(), 0.0);
        assert_eq!(speedup_at_1(&sample(0, true, true, Some(1.0), Some(1.0))).unwrap(), 1.0);
        assert_eq!(
            speedup_at_1(&sample(0, true, true, Some(2.0), Some(1.3))).unwrap(),
            0.65
        );
        assert!(matches!(
            speedup_at_1(&sample(3, true, true, Some(1.0), None)),
            Err(MetricsError::MissingBaseline { sample_index: 3, .. })
        ));
    }

    #[test]
    fn expected_speedup_examples() {
        assert_eq!(expected_speedup(&[2.0, 4.0]).unwrap(), 3.0);
        assert_eq!(expected_speedup(&[106.87]).unwrap(), 106.87);
        assert_eq!(expected_speedup(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(expected_speedup(&[]), Err(MetricsError::Empty));
    }

    #[test]
    fn invalid_samples_rejected() {
        assert!(sample(0, false, true, Some(1.0), Some(1.0)).validate().is_err());
        assert!(sample(0, true, false, Some(1.0), Some(1.0)).validate().is_err());
    }

    #[test]
    fn grouping_keeps_first_appearance_order() {
        let mut s = indicators("b", 2, 2, 1);
        s.extend(indicators("a", 4, 2, 0));
        s.extend(indicators("b", 2, 2, 2));
        let m = task_metrics(&s).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].task, "b");
        assert_eq!(m[0].pass_at_1, 0.75);
        assert_eq!(m[1].build_at_1, 0.5);
    }

    fn arb_sample() -> impl Strategy<Value = SampleOutcome> {
        ("[a-d]", 0usize..3, 0.01f64..10.0, 0.01f64..10.0).prop_map(|(t, level, rt, base)| SampleOutcome {
            task_id: t,
            sample_index: 0,
            built: level >= 1,
            passed: level >= 2,
            runtime_secs: (level >= 2).then_some(rt),
            baseline_secs: Some(base),
        })
    }

    proptest! {
        #[test]
        fn rate_invariants(samples in prop::collection::vec(arb_sample(), 1..60)) {
            for m in task_metrics(&samples).unwrap() {
                prop_assert!((0.0..=1.0).contains(&m.build_at_1));
                prop_assert!((0.0..=1.0).contains(&m.pass_at_1));
                prop_assert!(m.pass_at_1 <= m.build_at_1);
                prop_assert!(m.mean_speedup_at_1 >= 0.0);
            }
            for s in &samples {
                let v = speedup_at_1(s).unwrap();
                prop_assert!(v >= 0.0);
                prop_assert_eq!(v == 0.0, !s.passed);
            }
        }

        #[test]
        fn expected_speedup_ignores_order(mut means in prop::collection::vec(0.0f64..200.0, 1..20), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let a = expected_speedup(&means).unwrap();
            means.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = expected_speedup(&means).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}
