use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::exec::{execute, ExecError, ExecRequest, ExecutionResult};
use super::{measure_with, AdmissionGate, Evaluator, HarnessError, Stages};
use crate::report::{tail, BuildOutcome, Diagnostic, DiagnosticKind, EvaluationReport, RaceOutcome, TestOutcome};
use crate::task::{Candidate, CandidateId, TaskSpec};

const HARNESS_MARKER: &str = "{candidate}";
const HARNESS_CASE: &str = "harness";

/// Evaluates candidates by invoking the task's toolchain in per-candidate
/// scratch directories under `work_root`.
///
/// Layout per candidate: `work_root/<candidate-id>/{src,bin,logs}`. The
/// directory is removed after evaluation unless `keep_artifacts` is set.
#[derive(Debug)]
pub struct SubprocessEvaluator {
    work_root: PathBuf,
    keep_artifacts: bool,
    capture_cap: usize,
    gate: AdmissionGate,
}

struct Scratch {
    root: PathBuf,
    keep: bool,
}

impl Scratch {
    fn create(work_root: &Path, id: &CandidateId) -> Result<Scratch, HarnessError> {
        fs::create_dir_all(work_root).map_err(|e| HarnessError::Sandbox(e.to_string()))?;
        // identical sources evaluated concurrently (e.g. against different
        // tasks) get their own directory
        let mut suffix = 0u32;
        let root = loop {
            let name = match suffix {
                0 => id.to_string(),
                n => format!("{id}.{n}"),
            };
            let candidate_root = work_root.join(name);
            match fs::create_dir(&candidate_root) {
                Ok(()) => break candidate_root,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => suffix += 1,
                Err(e) => return Err(HarnessError::Sandbox(e.to_string())),
            }
        };
        for sub in ["src", "bin", "logs"] {
            fs::create_dir(root.join(sub)).map_err(|e| HarnessError::Sandbox(e.to_string()))?;
        }
        Ok(Scratch { root, keep: false })
    }

    fn src(&self) -> PathBuf {
        self.root.join("src")
    }
    fn bin(&self) -> PathBuf {
        self.root.join("bin")
    }
    fn logs(&self) -> PathBuf {
        self.root.join("logs")
    }

    fn log(&self, name: &str, text: &str) {
        let _ = fs::write(self.logs().join(name), text);
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        if !self.keep {
            let _ = fs::remove_dir_all(&self.root);
        }
    }
}

/// Output comparison: per-line trailing whitespace ignored, trailing blank
/// lines ignored, everything else byte-exact.
pub fn outputs_match(actual: &str, expected: &str) -> bool {
    fn canon(s: &str) -> Vec<&str> {
        let mut lines: Vec<&str> = s.lines().map(str::trim_end).collect();
        while lines.last() == Some(&"") {
            lines.pop();
        }
        lines
    }
    canon(actual) == canon(expected)
}

fn substitute(template: &[String], pairs: &[(&str, &Path)]) -> Vec<String> {
    template
        .iter()
        .map(|arg| {
            pairs
                .iter()
                .fold(arg.clone(), |acc, (ph, path)| acc.replace(ph, &path.to_string_lossy()))
        })
        .collect()
}

fn compose_source(candidate: &str, task: &TaskSpec) -> String {
    match &task.tests.harness {
        None => candidate.to_string(),
        Some(h) if h.contains(HARNESS_MARKER) => h.replace(HARNESS_MARKER, candidate),
        Some(h) => format!("{candidate}\n{h}"),
    }
}

fn exec_failure(e: ExecError) -> HarnessError {
    match e {
        ExecError::NotFound(p) => HarnessError::ToolchainMissing(p),
        other => HarnessError::Exec(other),
    }
}

impl SubprocessEvaluator {
    pub fn new(work_root: impl Into<PathBuf>) -> Self {
        SubprocessEvaluator {
            work_root: work_root.into(),
            keep_artifacts: false,
            capture_cap: 64 << 20,
            gate: AdmissionGate::new(usize::MAX),
        }
    }

    pub fn keep_artifacts(mut self, keep: bool) -> Self {
        self.keep_artifacts = keep;
        self
    }

    pub fn capture_cap(mut self, bytes: usize) -> Self {
        self.capture_cap = bytes;
        self
    }

    pub fn max_concurrent(mut self, jobs: usize) -> Self {
        self.gate = AdmissionGate::new(jobs);
        self
    }

    fn thread_env(&self, task: &TaskSpec, threads: u32) -> Vec<(String, String)> {
        task.toolchain
            .thread_env
            .iter()
            .map(|k| (k.clone(), threads.to_string()))
            .collect()
    }

    fn run_artifact(
        &self,
        artifact: &Path,
        task: &TaskSpec,
        stdin: &str,
        timeout: Duration,
        threads: u32,
        extra_env: &[(String, String)],
    ) -> Result<ExecutionResult, HarnessError> {
        let argv = substitute(&task.toolchain.run_command, &[("{bin}", artifact)]);
        let mut env = self.thread_env(task, threads);
        env.extend_from_slice(extra_env);
        let cwd = artifact.parent().unwrap_or(Path::new("."));
        execute(&ExecRequest {
            argv: &argv,
            stdin: stdin.as_bytes(),
            env: &env,
            cwd,
            timeout,
            capture_cap: self.capture_cap,
        })
        .map_err(exec_failure)
    }

    fn compile_in(
        &self,
        scratch: &Scratch,
        source: &str,
        task: &TaskSpec,
        sanitize: bool,
    ) -> Result<(BuildOutcome, PathBuf), HarnessError> {
        let src = scratch.src().join(task.source_file_name());
        fs::write(&src, compose_source(source, task)).map_err(|e| HarnessError::Sandbox(e.to_string()))?;
        let out = scratch.bin().join(if sanitize { "main-sanitized" } else { "main" });
        let template = if sanitize {
            &task.toolchain.sanitizer_build_command
        } else {
            &task.toolchain.build_command
        };
        let argv = substitute(template, &[("{src}", &src), ("{out}", &out)]);
        let timeout = task.toolchain.compile_timeout();
        let result = execute(&ExecRequest {
            argv: &argv,
            stdin: b"",
            env: &[],
            cwd: &scratch.root,
            timeout,
            capture_cap: self.capture_cap,
        })
        .map_err(exec_failure)?;

        let log = format!("{}{}", result.stderr, result.stdout);
        scratch.log(if sanitize { "build-sanitized.log" } else { "build.log" }, &log);
        let outcome = if result.timed_out {
            BuildOutcome::Failed {
                log: format!(
                    "[compile timed out after {:.1}s]\n{}",
                    timeout.as_secs_f64(),
                    tail(&log, 3900)
                ),
                timed_out: true,
            }
        } else if !result.success() {
            BuildOutcome::Failed {
                log: tail(&log, crate::report::DIAGNOSTIC_CAP).to_string(),
                timed_out: false,
            }
        } else if !out.is_file() {
            BuildOutcome::Failed {
                log: format!("build command succeeded but produced no artifact at {}", out.display()),
                timed_out: false,
            }
        } else {
            BuildOutcome::Ok
        };
        Ok((outcome, out))
    }

    /// Builds the candidate. With `sanitize` the sanitizer template is used.
    /// The returned path is only meaningful when the outcome is `Ok`; the
    /// artifact lives as long as `keep_artifacts` or the call's scratch dir.
    pub fn compile_candidate(
        &self,
        candidate: &Candidate,
        task: &TaskSpec,
        sanitize: bool,
    ) -> Result<(BuildOutcome, PathBuf), HarnessError> {
        let mut scratch = Scratch::create(&self.work_root, &candidate.id)?;
        scratch.keep = true;
        self.compile_in(&scratch, &candidate.source, task, sanitize)
    }

    /// Runs every test case (or the assertion harness) against a built
    /// artifact. Any timeout makes the whole outcome `TimedOut`; otherwise
    /// the first failing case is reported.
    pub fn run_tests(&self, artifact: &Path, task: &TaskSpec) -> Result<(TestOutcome, Vec<Diagnostic>), HarnessError> {
        let threads = task.toolchain.thread_count;
        if task.tests.harness.is_some() {
            let r = self.run_artifact(artifact, task, "", task.time_limit, threads, &[])?;
            return Ok(if r.timed_out {
                (
                    TestOutcome::TimedOut {
                        case_id: HARNESS_CASE.into(),
                    },
                    vec![Diagnostic::new(
                        DiagnosticKind::FailureReason,
                        &format!("harness {}", r.describe_exit()),
                    )],
                )
            } else if !r.success() {
                let detail = format!("harness {}\n{}", r.describe_exit(), tail(&r.stderr, 3000));
                (
                    TestOutcome::Failed {
                        case_id: HARNESS_CASE.into(),
                        detail: detail.clone(),
                    },
                    vec![Diagnostic::new(DiagnosticKind::FailureReason, &detail)],
                )
            } else {
                (TestOutcome::Passed, vec![])
            });
        }

        let mut first_failure: Option<(String, String)> = None;
        let mut first_timeout: Option<(String, Duration)> = None;
        for case in &task.tests.cases {
            let r = self.run_artifact(artifact, task, &case.input, task.time_limit, threads, &[])?;
            if r.timed_out {
                first_timeout.get_or_insert((case.id.clone(), r.wall_time));
            } else if !r.success() {
                first_failure.get_or_insert_with(|| {
                    (
                        case.id.clone(),
                        format!("case {}: {}\n{}", case.id, r.describe_exit(), tail(&r.stderr, 3000)),
                    )
                });
            } else if !outputs_match(&r.stdout, &case.expected) {
                first_failure.get_or_insert_with(|| {
                    (
                        case.id.clone(),
                        format!(
                            "case {}: wrong answer\nexpected:\n{}\ngot:\n{}",
                            case.id,
                            tail(&case.expected, 1500),
                            tail(&r.stdout, 1500)
                        ),
                    )
                });
            }
        }
        Ok(match (first_timeout, first_failure) {
            (Some((case_id, wall)), _) => {
                let msg = format!("case {case_id}: timed out after {:.3}s", wall.as_secs_f64());
                (
                    TestOutcome::TimedOut { case_id },
                    vec![Diagnostic::new(DiagnosticKind::FailureReason, &msg)],
                )
            }
            (None, Some((case_id, detail))) => (
                TestOutcome::Failed {
                    case_id,
                    detail: detail.clone(),
                },
                vec![Diagnostic::new(DiagnosticKind::FailureReason, &detail)],
            ),
            (None, None) => (TestOutcome::Passed, vec![]),
        })
    }

    /// Rebuilds with the sanitizer toolchain and replays the test inputs.
    pub fn detect_races(&self, candidate: &Candidate, task: &TaskSpec) -> Result<RaceOutcome, HarnessError> {
        let mut scratch = Scratch::create(&self.work_root, &candidate.id)?;
        scratch.keep = self.keep_artifacts;
        self.detect_races_in(&scratch, &candidate.source, task)
    }

    fn detect_races_in(&self, scratch: &Scratch, source: &str, task: &TaskSpec) -> Result<RaceOutcome, HarnessError> {
        let (build, artifact) = self.compile_in(scratch, source, task, true)?;
        if let BuildOutcome::Failed { log, .. } = build {
            // an unverifiable candidate cannot score
            return Ok(RaceOutcome::RaceDetected {
                excerpt: format!("sanitizer build failed:\n{log}"),
            });
        }
        let timeout = task.time_limit.mul_f64(task.toolchain.sanitizer_time_factor);
        let inputs: Vec<&str> = if task.tests.harness.is_some() {
            vec![""]
        } else {
            task.tests.cases.iter().map(|c| c.input.as_str()).collect()
        };
        for input in inputs {
            let r = self.run_artifact(&artifact, task, input, timeout, task.toolchain.thread_count, &[])?;
            scratch.log("sanitizer.log", &r.stderr);
            if r.timed_out {
                return Ok(RaceOutcome::DeadlockSuspected {
                    excerpt: format!(
                        "sanitized run timed out after {:.1}s\n{}",
                        timeout.as_secs_f64(),
                        tail(&r.stderr, 3800)
                    ),
                });
            }
            if let Some(pos) = task
                .toolchain
                .race_markers
                .iter()
                .filter_map(|m| r.stderr.find(m.as_str()))
                .min()
            {
                return Ok(RaceOutcome::RaceDetected {
                    excerpt: head_from(&r.stderr, pos, crate::report::DIAGNOSTIC_CAP),
                });
            }
            if !r.success() {
                return Ok(RaceOutcome::RaceDetected {
                    excerpt: format!("sanitized run failed: {}\n{}", r.describe_exit(), tail(&r.stderr, 3800)),
                });
            }
        }
        Ok(RaceOutcome::Clean)
    }

    /// Median wall time over `repetitions` runs of the timing input.
    pub fn measure_runtime(&self, artifact: &Path, task: &TaskSpec, threads: u32) -> Result<Duration, HarnessError> {
        let input = task.timing_case().map(|c| c.input.as_str()).unwrap_or("");
        let timeout = task.toolchain.run_timeout().max(task.time_limit);
        measure_with(task.toolchain.repetitions, || {
            let r = self.run_artifact(artifact, task, input, timeout, threads, &[])?;
            if !r.success() {
                return Err(HarnessError::Timing(r.describe_exit()));
            }
            Ok(r.wall_time)
        })
    }

    fn evaluate_inner(
        &self,
        candidate: &Candidate,
        task: &TaskSpec,
        stages: Stages,
    ) -> Result<EvaluationReport, HarnessError> {
        let mut scratch = Scratch::create(&self.work_root, &candidate.id)?;
        scratch.keep = self.keep_artifacts;
        let id = candidate.id.clone();

        let (build, artifact) = self.compile_in(&scratch, &candidate.source, task, false)?;
        if let BuildOutcome::Failed { log, timed_out } = build {
            return Ok(EvaluationReport::build_failed(id, &log, timed_out));
        }
        let (tests, diagnostics) = self.run_tests(&artifact, task)?;
        let mut report = EvaluationReport::tested(id.clone(), tests, diagnostics);
        if report.tests != TestOutcome::Passed || !stages.race() {
            return Ok(report);
        }
        report = report.with_race(self.detect_races_in(&scratch, &candidate.source, task)?);
        if report.race != RaceOutcome::Clean || !stages.timing() {
            return Ok(report);
        }
        match self.measure_runtime(&artifact, task, task.toolchain.thread_count) {
            Ok(t) => Ok(report.with_runtime(t)),
            Err(HarnessError::Timing(reason)) => {
                // flaky program: a timing run crashed or hung
                let detail = format!("timing run failed: {reason}");
                Ok(EvaluationReport::tested(
                    id,
                    TestOutcome::Failed {
                        case_id: "timing".into(),
                        detail: detail.clone(),
                    },
                    vec![Diagnostic::new(DiagnosticKind::FailureReason, &detail)],
                ))
            }
            Err(e) => Err(e),
        }
    }
}

fn head_from(text: &str, start: usize, max: usize) -> String {
    let mut end = (start + max).min(text.len());
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    text[start..end].to_string()
}

impl Evaluator for SubprocessEvaluator {
    fn evaluate(&self, candidate: &Candidate, task: &TaskSpec, stages: Stages) -> EvaluationReport {
        let _slot = self.gate.enter();
        match self.evaluate_inner(candidate, task, stages) {
            Ok(report) => report,
            Err(e) => EvaluationReport::infra(candidate.id.clone(), &e.to_string()),
        }
    }

    fn measure(&self, source: &str, task: &TaskSpec, threads: u32) -> Result<Duration, HarnessError> {
        let _slot = self.gate.enter();
        let id = crate::task::normalize_and_hash(source, task.language_tag);
        let mut scratch = Scratch::create(&self.work_root, &id)?;
        scratch.keep = self.keep_artifacts;
        let (build, artifact) = self.compile_in(&scratch, source, task, false)?;
        if let BuildOutcome::Failed { log, .. } = build {
            return Err(HarnessError::Build(tail(&log, 1000).to_string()));
        }
        self.measure_runtime(&artifact, task, threads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_ignores_trailing_whitespace_only() {
        assert!(outputs_match("5", "5\n"));
        assert!(outputs_match("1 2  \n3\n\n", "1 2\n3"));
        assert!(!outputs_match("1  2", "1 2"));
        assert!(!outputs_match("5", "6"));
        assert!(!outputs_match("", "0"));
    }

    #[test]
    fn harness_splices_at_marker_or_appends() {
        let mut task = crate::testing::echo_task();
        task.tests.harness = Some("int main(){ {candidate} }".into());
        assert_eq!(compose_source("f();", &task), "int main(){ f(); }");
        task.tests.harness = Some("int main(){}".into());
        assert_eq!(compose_source("int f();", &task), "int f();\nint main(){}");
    }

    #[test]
    fn templates_substitute_paths() {
        let argv = substitute(
            &["cc".into(), "{src}".into(), "-o{out}".into()],
            &[("{src}", Path::new("/a.c")), ("{out}", Path::new("/b"))],
        );
        assert_eq!(argv, ["cc", "/a.c", "-o/b"]);
    }

    #[test]
    fn scratch_directories_are_per_candidate_and_cleaned() {
        let root = tempfile::tempdir().unwrap();
        let id = CandidateId::from("abc");
        let a = Scratch::create(root.path(), &id).unwrap();
        let b = Scratch::create(root.path(), &id).unwrap();
        assert_ne!(a.root, b.root);
        assert!(a.src().is_dir() && a.bin().is_dir() && a.logs().is_dir());
        let (pa, pb) = (a.root.clone(), b.root.clone());
        drop(a);
        drop(b);
        assert!(!pa.exists() && !pb.exists());
    }

    #[test]
    fn missing_toolchain_is_an_infra_report() {
        let root = tempfile::tempdir().unwrap();
        let mut task = crate::testing::echo_task();
        task.toolchain.build_command = vec!["no-such-compiler-xyz".into(), "{src}".into(), "{out}".into()];
        let cand = Candidate::seed("int main(){}", task.language_tag);
        let report = SubprocessEvaluator::new(root.path()).evaluate(&cand, &task, Stages::Full);
        assert!(report.is_infra());
        assert_eq!(report.tests, TestOutcome::Skipped);
        report.check_gating().unwrap();
    }
}
