use std::time::Duration;

use super::{Evaluator, HarnessError, Stages};
use crate::report::{Diagnostic, DiagnosticKind, EvaluationReport, RaceOutcome, TestOutcome};
use crate::task::{Candidate, TaskSpec};

const DIRECTIVE: &str = "#pragma stub ";

/// Deterministic evaluator that reads its verdict from directives embedded in
/// the candidate source, one per line:
///
/// ```text
/// #pragma stub build=fail error: expected ';' before '}' token
/// #pragma stub tests=fail wrong answer on case 3
/// #pragma stub tests=timeout
/// #pragma stub race=detected WARNING: ThreadSanitizer: data race
/// #pragma stub race=deadlock
/// #pragma stub runtime=0.25
/// #pragma stub scaling=linear
/// #pragma stub infra=permission denied
/// ```
///
/// Text after a `key=value` pair becomes the diagnostic. Sources without
/// directives pass every stage with a runtime of `default_runtime`.
/// Directives are not comments, so they take part in candidate identity.
#[derive(Debug, Clone)]
pub struct StubEvaluator {
    pub default_runtime: Duration,
}

impl Default for StubEvaluator {
    fn default() -> Self {
        StubEvaluator {
            default_runtime: Duration::from_secs(1),
        }
    }
}

#[derive(Debug, Default)]
struct Script {
    build_fail: Option<String>,
    tests_fail: Option<String>,
    tests_timeout: bool,
    race: Option<RaceOutcome>,
    runtime: Option<Duration>,
    linear_scaling: bool,
    infra: Option<String>,
}

fn parse(source: &str) -> Result<Script, String> {
    let mut s = Script::default();
    for line in source.lines() {
        let Some(rest) = line.trim_start().strip_prefix(DIRECTIVE) else {
            continue;
        };
        let rest = rest.trim();
        let (pair, message) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let message = message.trim().to_string();
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("malformed stub directive: {line}"))?;
        let or = |m: String, d: &str| if m.is_empty() { d.to_string() } else { m };
        match (key, value) {
            ("build", "fail") => s.build_fail = Some(or(message, "error: stub build failure")),
            ("tests", "fail") => s.tests_fail = Some(or(message, "wrong answer")),
            ("tests", "timeout") => s.tests_timeout = true,
            ("race", "detected") => {
                s.race = Some(RaceOutcome::RaceDetected {
                    excerpt: or(message, "WARNING: ThreadSanitizer: data race"),
                })
            }
            ("race", "deadlock") => {
                s.race = Some(RaceOutcome::DeadlockSuspected {
                    excerpt: or(message, "sanitized run timed out"),
                })
            }
            ("runtime", v) => {
                let secs: f64 = v.parse().map_err(|_| format!("bad runtime in: {line}"))?;
                if !(secs.is_finite() && secs > 0.0) {
                    return Err(format!("runtime must be positive in: {line}"));
                }
                s.runtime = Some(Duration::from_secs_f64(secs));
            }
            ("scaling", "linear") => s.linear_scaling = true,
            ("scaling", "none") => s.linear_scaling = false,
            ("infra", _) => s.infra = Some(or(message, "stub infrastructure failure")),
            _ => return Err(format!("unknown stub directive: {line}")),
        }
    }
    Ok(s)
}

impl StubEvaluator {
    fn runtime(&self, script: &Script) -> Duration {
        script.runtime.unwrap_or(self.default_runtime)
    }
}

impl Evaluator for StubEvaluator {
    fn evaluate(&self, candidate: &Candidate, task: &TaskSpec, stages: Stages) -> EvaluationReport {
        let id = candidate.id.clone();
        let script = match parse(&candidate.source) {
            Ok(s) => s,
            Err(e) => return EvaluationReport::build_failed(id, &e, false),
        };
        if let Some(msg) = &script.infra {
            return EvaluationReport::infra(id, msg);
        }
        if let Some(log) = &script.build_fail {
            return EvaluationReport::build_failed(id, log, false);
        }
        let case_id = task
            .tests
            .cases
            .first()
            .map(|c| c.id.clone())
            .unwrap_or_else(|| "harness".into());
        if script.tests_timeout {
            let msg = format!("case {case_id}: timed out after {:.3}s", task.time_limit.as_secs_f64());
            return EvaluationReport::tested(
                id,
                TestOutcome::TimedOut { case_id },
                vec![Diagnostic::new(DiagnosticKind::FailureReason, &msg)],
            );
        }
        if let Some(detail) = &script.tests_fail {
            return EvaluationReport::tested(
                id,
                TestOutcome::Failed {
                    case_id,
                    detail: detail.clone(),
                },
                vec![Diagnostic::new(DiagnosticKind::FailureReason, detail)],
            );
        }
        let mut report = EvaluationReport::tested(id, TestOutcome::Passed, vec![]);
        if stages.race() {
            report = report.with_race(script.race.clone().unwrap_or(RaceOutcome::Clean));
        }
        if stages.timing() {
            report = report.with_runtime(self.runtime(&script));
        }
        report
    }

    fn measure(&self, source: &str, _task: &TaskSpec, threads: u32) -> Result<Duration, HarnessError> {
        let script = parse(source).map_err(HarnessError::Build)?;
        if let Some(msg) = script.infra {
            return Err(HarnessError::Sandbox(msg));
        }
        if let Some(log) = script.build_fail {
            return Err(HarnessError::Build(log));
        }
        if script.tests_timeout || script.tests_fail.is_some() {
            return Err(HarnessError::Timing("stub program fails its tests".into()));
        }
        let base = self.runtime(&script);
        Ok(if script.linear_scaling {
            base / threads.max(1)
        } else {
            base
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::BuildOutcome;
    use crate::testing::echo_task;

    fn eval(src: &str, stages: Stages) -> EvaluationReport {
        let task = echo_task();
        StubEvaluator::default().evaluate(&Candidate::seed(src, task.language_tag), &task, stages)
    }

    #[test]
    fn plain_source_passes_with_default_runtime() {
        let r = eval("int main(){}", Stages::Full);
        assert_eq!(r.race, RaceOutcome::Clean);
        assert_eq!(r.runtime, Some(Duration::from_secs(1)));
    }

    #[test]
    fn directives_drive_each_stage() {
        let r = eval("#pragma stub build=fail error: expected ';'\n", Stages::Full);
        assert!(matches!(&r.build, BuildOutcome::Failed { log, .. } if log.contains("expected ';'")));
        let r = eval("#pragma stub tests=timeout\n", Stages::Full);
        assert!(matches!(r.tests, TestOutcome::TimedOut { .. }));
        let r = eval("#pragma stub race=detected\n#pragma stub runtime=0.1\n", Stages::Full);
        assert!(matches!(r.race, RaceOutcome::RaceDetected { .. }));
        assert_eq!(r.runtime, None);
        let r = eval("#pragma stub runtime=0.25\n", Stages::Full);
        assert_eq!(r.runtime, Some(Duration::from_millis(250)));
        let r = eval("#pragma stub infra=permission denied\n", Stages::Full);
        assert!(r.is_infra());
    }

    #[test]
    fn correctness_stage_skips_race_and_timing() {
        let r = eval("#pragma stub race=detected\n", Stages::Correctness);
        assert_eq!(r.race, RaceOutcome::Skipped);
        assert_eq!(r.runtime, None);
    }

    #[test]
    fn linear_scaling_divides_by_threads() {
        let task = echo_task();
        let src = "#pragma stub runtime=1.0\n#pragma stub scaling=linear\n";
        let t = StubEvaluator::default().measure(src, &task, 4).unwrap();
        assert_eq!(t, Duration::from_millis(250));
    }

    #[test]
    fn malformed_directive_fails_build() {
        let r = eval("#pragma stub bogus\n", Stages::Full);
        assert!(matches!(r.build, BuildOutcome::Failed { .. }));
    }
}
