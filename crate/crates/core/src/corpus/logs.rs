use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::engine::TrajectoryEntry;
use crate::task::{normalize_and_hash, CandidateId, LanguageTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogStatus {
    Pass,
    FailCompile,
    FailTest,
    Timeout,
    InfraError,
}

/// One execution attempt: problem, code, verdict and (on success) runtime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionLogRecord {
    pub task_id: String,
    pub problem_description: String,
    pub code: String,
    pub status: LogStatus,
    pub runtime_secs: Option<f64>,
    pub error_message: Option<String>,
    #[serde(default)]
    pub language: LanguageTag,
}

impl ExecutionLogRecord {
    pub fn validate(&self) -> Result<(), String> {
        match self.status {
            LogStatus::Pass if self.runtime_secs.is_none() => {
                Err(format!("{}: passing record without runtime", self.task_id))
            }
            LogStatus::InfraError => Err(format!("{}: infra_error records are not corpus material", self.task_id)),
            _ => Ok(()),
        }
    }

    /// Log record for a scored trajectory entry.
    pub fn from_entry(task_id: &str, description: &str, lang: LanguageTag, e: &TrajectoryEntry) -> Self {
        let status = match (e.report.build.as_str(), e.report.tests.as_str()) {
            ("infra_error", _) => LogStatus::InfraError,
            ("failed" | "timed_out", _) => LogStatus::FailCompile,
            (_, "timed_out") => LogStatus::Timeout,
            (_, "passed") if e.is_valid() => LogStatus::Pass,
            _ => LogStatus::FailTest,
        };
        let error_message = match status {
            LogStatus::Pass => None,
            LogStatus::FailTest if e.report.tests == "passed" => Some(format!("race check: {}", e.report.race)),
            _ => Some(format!("build: {}, tests: {}", e.report.build, e.report.tests)),
        };
        ExecutionLogRecord {
            task_id: task_id.to_string(),
            problem_description: description.to_string(),
            code: e.source.clone(),
            status,
            runtime_secs: if status == LogStatus::Pass {
                e.report.runtime_secs
            } else {
                None
            },
            error_message,
            language: lang,
        }
    }
}

/// Drops infrastructure failures and held-out tasks, collapses duplicate
/// programs per task (a passing copy wins), and keeps one failure per
/// distinct error message per task. Input order is otherwise preserved.
pub fn clean_execution_logs(records: &[ExecutionLogRecord], holdout: &HashSet<String>) -> Vec<ExecutionLogRecord> {
    let kept: Vec<&ExecutionLogRecord> = records
        .iter()
        .filter(|r| r.status != LogStatus::InfraError && !holdout.contains(&r.task_id))
        .collect();

    // one record per (task, program): first pass if any, else first record
    let keys: Vec<(&str, CandidateId)> = kept
        .iter()
        .map(|r| (r.task_id.as_str(), normalize_and_hash(&r.code, r.language)))
        .collect();
    let mut chosen: HashMap<(&str, CandidateId), usize> = HashMap::new();
    for (i, (r, key)) in kept.iter().zip(&keys).enumerate() {
        match chosen.get(key) {
            None => {
                chosen.insert(key.clone(), i);
            }
            Some(&j) if kept[j].status != LogStatus::Pass && r.status == LogStatus::Pass => {
                chosen.insert(key.clone(), i);
            }
            _ => {}
        }
    }

    let mut messages: HashSet<(&str, Option<&str>)> = HashSet::new();
    let mut out = Vec::new();
    for (i, (r, key)) in kept.iter().zip(&keys).enumerate() {
        if chosen[key] != i {
            continue;
        }
        if r.status != LogStatus::Pass && !messages.insert((r.task_id.as_str(), r.error_message.as_deref())) {
            continue;
        }
        out.push((*r).clone());
    }
    out
}
