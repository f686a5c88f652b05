use std::fs;
use std::path::{Path, PathBuf};

use super::{MetricsError, SampleOutcome};
use crate::harness::{Evaluator, Stages};
use crate::par;
use crate::report::BuildOutcome;
use crate::task::{Candidate, TaskSpec};

/// A task with the generated samples to score against it.
#[derive(Debug, Clone)]
pub struct SuiteTask {
    pub task: TaskSpec,
    pub dir: PathBuf,
    pub samples: Vec<String>,
}

/// Loads every task directory under `suite` (sorted by name). Samples come
/// from `<task>/completions/*` in name order, falling back to `seed.src`.
pub fn load_suite(suite: &Path) -> Result<Vec<SuiteTask>, MetricsError> {
    let io = |p: &Path, e: std::io::Error| MetricsError::Invalid(format!("{}: {e}", p.display()));
    let mut dirs: Vec<PathBuf> = fs::read_dir(suite)
        .map_err(|e| io(suite, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("task.toml").is_file())
        .collect();
    dirs.sort();
    let mut out = Vec::new();
    for dir in dirs {
        let task = TaskSpec::load(&dir).map_err(|e| MetricsError::Invalid(e.to_string()))?;
        let completions = dir.join("completions");
        let samples = if completions.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(&completions)
                .map_err(|e| io(&completions, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            files.sort();
            files
                .iter()
                .map(|f| fs::read_to_string(f).map_err(|e| io(f, e)))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            task.seed_solution.iter().cloned().collect()
        };
        if samples.is_empty() {
            return Err(MetricsError::Invalid(format!("{}: no samples", dir.display())));
        }
        out.push(SuiteTask { task, dir, samples });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub samples: Vec<SampleOutcome>,
    /// Tasks or samples the harness could not evaluate.
    pub infra_failures: Vec<String>,
}

/// Scores every sample through the full pipeline. A sample counts as passed
/// when it passes tests and the race check; its runtime is the timed median.
/// The sequential baseline is timed once per task at one thread.
pub fn evaluate_suite(tasks: &[SuiteTask], evaluator: &dyn Evaluator, jobs: usize) -> SuiteRun {
    let mut infra_failures = Vec::new();
    let baselines: Vec<Option<f64>> = tasks
        .iter()
        .map(|t| match &t.task.sequential_baseline {
            Some(src) => match evaluator.measure(src, &t.task, 1) {
                Ok(d) => Some(d.as_secs_f64()),
                Err(e) => {
                    infra_failures.push(format!("{}: baseline: {e}", t.task.id));
                    None
                }
            },
            None => None,
        })
        .collect();

    let work: Vec<(usize, usize)> = tasks
        .iter()
        .enumerate()
        .flat_map(|(ti, t)| (0..t.samples.len()).map(move |si| (ti, si)))
        .collect();
    let reports = par::map_bounded(&work, jobs, |&(ti, si)| {
        let t = &tasks[ti];
        let c = Candidate::seed(t.samples[si].clone(), t.task.language_tag);
        evaluator.evaluate(&c, &t.task, Stages::Full)
    });

    let mut samples = Vec::with_capacity(work.len());
    for (&(ti, si), report) in work.iter().zip(reports) {
        let task_id = tasks[ti].task.id.clone();
        if let Some(msg) = &report.infra_error {
            infra_failures.push(format!("{task_id}#{si}: {msg}"));
        }
        let passed = report.is_valid();
        samples.push(SampleOutcome {
            task_id,
            sample_index: si,
            built: report.build == BuildOutcome::Ok,
            passed,
            runtime_secs: report.runtime.filter(|_| passed).map(|d| d.as_secs_f64()),
            baseline_secs: baselines[ti],
        });
    }
    SuiteRun {
        samples,
        infra_failures,
    }
}
