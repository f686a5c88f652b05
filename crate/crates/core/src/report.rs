//! Evaluation verdicts.
//!
//! Stages run in a fixed order (build, tests, race detection, timing) and a
//! later stage is only attempted when the previous one succeeded. The
//! constructors here are the only way the harness builds reports, so the
//! gating rules hold by construction; [`EvaluationReport::check_gating`]
//! re-verifies them for reports that arrive from disk.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::task::CandidateId;

/// Tail kept from each diagnostic artifact.
pub const DIAGNOSTIC_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BuildOutcome {
    Ok,
    Failed { log: String, timed_out: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TestOutcome {
    Passed,
    Failed { case_id: String, detail: String },
    TimedOut { case_id: String },
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RaceOutcome {
    Clean,
    RaceDetected { excerpt: String },
    DeadlockSuspected { excerpt: String },
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    CompilerLog,
    FailureReason,
    SanitizerReport,
    Infrastructure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub text: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, text: &str) -> Self {
        Diagnostic {
            kind,
            text: tail(text, DIAGNOSTIC_CAP).to_string(),
        }
    }
}

/// Last `max_bytes` of `text`, cut on a char boundary.
pub fn tail(text: &str, max_bytes: usize) -> &str {
    if text.len() <= max_bytes {
        return text;
    }
    let mut start = text.len() - max_bytes;
    while !text.is_char_boundary(start) {
        start += 1;
    }
    &text[start..]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub candidate_id: CandidateId,
    pub build: BuildOutcome,
    pub tests: TestOutcome,
    pub race: RaceOutcome,
    pub runtime: Option<Duration>,
    pub diagnostics: Vec<Diagnostic>,
    /// Set when the harness itself failed (missing toolchain, sandbox setup).
    /// Such reports say nothing about the candidate.
    pub infra_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("report violates stage gating: {0}")]
pub struct GatingViolation(pub &'static str);

impl EvaluationReport {
    pub fn build_failed(candidate_id: CandidateId, log: &str, timed_out: bool) -> Self {
        EvaluationReport {
            candidate_id,
            build: BuildOutcome::Failed {
                log: tail(log, DIAGNOSTIC_CAP).to_string(),
                timed_out,
            },
            tests: TestOutcome::Skipped,
            race: RaceOutcome::Skipped,
            runtime: None,
            diagnostics: vec![Diagnostic::new(DiagnosticKind::CompilerLog, log)],
            infra_error: None,
        }
    }

    pub fn infra(candidate_id: CandidateId, message: &str) -> Self {
        EvaluationReport {
            candidate_id,
            build: BuildOutcome::Failed {
                log: String::new(),
                timed_out: false,
            },
            tests: TestOutcome::Skipped,
            race: RaceOutcome::Skipped,
            runtime: None,
            diagnostics: vec![Diagnostic::new(DiagnosticKind::Infrastructure, message)],
            infra_error: Some(message.to_string()),
        }
    }

    /// Build succeeded; the test verdict is `tests`.
    pub fn tested(candidate_id: CandidateId, tests: TestOutcome, diagnostics: Vec<Diagnostic>) -> Self {
        EvaluationReport {
            candidate_id,
            build: BuildOutcome::Ok,
            tests,
            race: RaceOutcome::Skipped,
            runtime: None,
            diagnostics,
            infra_error: None,
        }
    }

    /// Record the race stage. Ignored unless tests passed, and once a
    /// runtime exists (timing comes after the race stage).
    pub fn with_race(mut self, race: RaceOutcome) -> Self {
        if self.tests == TestOutcome::Passed && self.runtime.is_none() {
            match &race {
                RaceOutcome::RaceDetected { excerpt } | RaceOutcome::DeadlockSuspected { excerpt } => {
                    self.diagnostics
                        .push(Diagnostic::new(DiagnosticKind::SanitizerReport, excerpt));
                }
                _ => {}
            }
            self.race = race;
        }
        self
    }

    /// Record T(x). Ignored unless the race stage came back clean.
    pub fn with_runtime(mut self, runtime: Duration) -> Self {
        if self.race == RaceOutcome::Clean && !runtime.is_zero() {
            self.runtime = Some(runtime);
        }
        self
    }

    pub fn is_infra(&self) -> bool {
        self.infra_error.is_some()
    }

    pub fn passed_tests(&self) -> bool {
        self.build == BuildOutcome::Ok && self.tests == TestOutcome::Passed
    }

    /// Passed everything that ran, including race detection when it ran.
    pub fn is_valid(&self) -> bool {
        self.passed_tests()
            && !matches!(
                self.race,
                RaceOutcome::RaceDetected { .. } | RaceOutcome::DeadlockSuspected { .. }
            )
    }

    pub fn check_gating(&self) -> Result<(), GatingViolation> {
        if self.tests != TestOutcome::Skipped && self.build != BuildOutcome::Ok {
            return Err(GatingViolation("tests ran without a successful build"));
        }
        if self.race != RaceOutcome::Skipped && self.tests != TestOutcome::Passed {
            return Err(GatingViolation("race detection ran without passing tests"));
        }
        if let Some(t) = self.runtime {
            if self.race != RaceOutcome::Clean {
                return Err(GatingViolation("runtime recorded without a clean race check"));
            }
            if t.is_zero() {
                return Err(GatingViolation("runtime must be positive"));
            }
        }
        Ok(())
    }

    /// One-word stage labels for logs and trajectories.
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            build: match &self.build {
                _ if self.is_infra() => "infra_error",
                BuildOutcome::Ok => "ok",
                BuildOutcome::Failed { timed_out: true, .. } => "timed_out",
                BuildOutcome::Failed { .. } => "failed",
            }
            .into(),
            tests: match &self.tests {
                TestOutcome::Passed => "passed",
                TestOutcome::Failed { .. } => "failed",
                TestOutcome::TimedOut { .. } => "timed_out",
                TestOutcome::Skipped => "skipped",
            }
            .into(),
            race: match &self.race {
                RaceOutcome::Clean => "clean",
                RaceOutcome::RaceDetected { .. } => "race_detected",
                RaceOutcome::DeadlockSuspected { .. } => "deadlock_suspected",
                RaceOutcome::Skipped => "skipped",
            }
            .into(),
            runtime_secs: self.runtime.map(|d| d.as_secs_f64()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub build: String,
    pub tests: String,
    pub race: String,
    pub runtime_secs: Option<f64>,
}
