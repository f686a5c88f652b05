//! Tasks and candidates: the values every other module passes around.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::MutationKind;
use crate::lexer;

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("task directory {0} is missing {1}")]
    MissingFile(PathBuf, &'static str),
    #[error("{path}: invalid task config: {message}")]
    Config { path: PathBuf, message: String },
    #[error("invalid task: {0}")]
    Invalid(String),
    #[error("invalid candidate: {0}")]
    Candidate(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TaskError + '_ {
    move |source| TaskError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LanguageTag {
    #[default]
    CxxParlay,
    RustRayon,
    Other,
}

impl LanguageTag {
    pub fn default_source_file(self) -> &'static str {
        match self {
            LanguageTag::CxxParlay => "main.cpp",
            LanguageTag::RustRayon => "main.rs",
            LanguageTag::Other => "main.src",
        }
    }
}

/// Argument-vector templates and run limits binding the pipeline stages to
/// concrete tools.
///
/// Build templates must mention `{src}` and `{out}`; the run template must
/// mention `{bin}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolchainPolicy {
    pub build_command: Vec<String>,
    pub sanitizer_build_command: Vec<String>,
    #[serde(default = "default_run_command")]
    pub run_command: Vec<String>,
    #[serde(default = "default_thread_count")]
    pub thread_count: u32,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default = "default_compile_timeout")]
    pub compile_timeout_secs: f64,
    #[serde(default = "default_run_timeout")]
    pub run_timeout_secs: f64,
    /// Sanitized runs get `time_limit * sanitizer_time_factor` per test.
    #[serde(default = "default_sanitizer_factor")]
    pub sanitizer_time_factor: f64,
    /// Environment variables that receive the pinned thread count.
    #[serde(default = "default_thread_env")]
    pub thread_env: Vec<String>,
    /// Substrings in sanitized-run stderr that indicate a detected race.
    #[serde(default = "default_race_markers")]
    pub race_markers: Vec<String>,
    /// File name the candidate source is written to (compilers key off the extension).
    #[serde(default)]
    pub source_file: Option<String>,
}

fn default_run_command() -> Vec<String> {
    vec!["{bin}".into()]
}
fn default_thread_count() -> u32 {
    32
}
fn default_repetitions() -> u32 {
    3
}
fn default_compile_timeout() -> f64 {
    120.0
}
fn default_run_timeout() -> f64 {
    30.0
}
fn default_sanitizer_factor() -> f64 {
    10.0
}
fn default_thread_env() -> Vec<String> {
    ["PARLAY_NUM_THREADS", "RAYON_NUM_THREADS", "OMP_NUM_THREADS"]
        .map(String::from)
        .to_vec()
}
fn default_race_markers() -> Vec<String> {
    ["WARNING: ThreadSanitizer", "ERROR: ThreadSanitizer"]
        .map(String::from)
        .to_vec()
}

impl ToolchainPolicy {
    /// Stock g++ / ThreadSanitizer setup for C++ tasks.
    pub fn gxx() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        ToolchainPolicy {
            build_command: s(&["g++", "-std=c++17", "-O2", "-pthread", "{src}", "-o", "{out}"]),
            sanitizer_build_command: s(&[
                "g++",
                "-std=c++17",
                "-O1",
                "-g",
                "-fsanitize=thread",
                "-pthread",
                "{src}",
                "-o",
                "{out}",
            ]),
            run_command: default_run_command(),
            thread_count: default_thread_count(),
            repetitions: default_repetitions(),
            compile_timeout_secs: default_compile_timeout(),
            run_timeout_secs: default_run_timeout(),
            sanitizer_time_factor: default_sanitizer_factor(),
            thread_env: default_thread_env(),
            race_markers: default_race_markers(),
            source_file: None,
        }
    }

    pub fn for_language(lang: LanguageTag) -> Self {
        let mut policy = Self::gxx();
        if lang == LanguageTag::RustRayon {
            let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
            policy.build_command = s(&["rustc", "--edition", "2021", "-O", "{src}", "-o", "{out}"]);
            // ThreadSanitizer for Rust needs a nightly toolchain; callers override this.
            policy.sanitizer_build_command = s(&[
                "rustc",
                "--edition",
                "2021",
                "-Zsanitizer=thread",
                "{src}",
                "-o",
                "{out}",
            ]);
        }
        policy
    }

    pub fn compile_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.compile_timeout_secs)
    }

    pub fn run_timeout(&self) -> Duration {
        Duration::from_secs_f64(self.run_timeout_secs)
    }

    pub fn validate(&self) -> Result<(), TaskError> {
        let has = |argv: &[String], ph: &str| argv.iter().any(|a| a.contains(ph));
        for (name, argv) in [
            ("build_command", &self.build_command),
            ("sanitizer_build_command", &self.sanitizer_build_command),
        ] {
            if argv.is_empty() || !has(argv, "{src}") || !has(argv, "{out}") {
                return Err(TaskError::Invalid(format!(
                    "{name} must be non-empty and contain {{src}} and {{out}}"
                )));
            }
        }
        if self.run_command.is_empty() || !has(&self.run_command, "{bin}") {
            return Err(TaskError::Invalid(
                "run_command must be non-empty and contain {bin}".into(),
            ));
        }
        if self.thread_count == 0 {
            return Err(TaskError::Invalid("thread_count must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(TaskError::Invalid("repetitions must be at least 1".into()));
        }
        for (name, v) in [
            ("compile_timeout_secs", self.compile_timeout_secs),
            ("run_timeout_secs", self.run_timeout_secs),
            ("sanitizer_time_factor", self.sanitizer_time_factor),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(TaskError::Invalid(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub input: String,
    pub expected: String,
}

/// Input/output pairs, an assertion harness, or both.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TestSuite {
    pub cases: Vec<TestCase>,
    /// Source fragment with its own `main`. The candidate is spliced in at a
    /// `{candidate}` marker, or prepended when no marker exists.
    pub harness: Option<String>,
}

impl TestSuite {
    pub fn is_empty(&self) -> bool {
        self.cases.is_empty() && self.harness.is_none()
    }

    /// Human-readable rendering used for corpus records.
    pub fn render(&self) -> String {
        if let Some(h) = &self.harness {
            return h.clone();
        }
        let mut out = String::new();
        for case in &self.cases {
            out.push_str(&format!(
                "# case {}\n## input\n{}\n## expected\n{}\n",
                case.id,
                case.input.trim_end(),
                case.expected.trim_end()
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub description: String,
    pub tests: TestSuite,
    pub toolchain: ToolchainPolicy,
    pub seed_solution: Option<String>,
    pub sequential_baseline: Option<String>,
    pub time_limit: Duration,
    pub language_tag: LanguageTag,
    /// Index into `tests.cases` used for timing; defaults to the last case.
    pub timing_case: Option<usize>,
    /// Mutations applied to reach this task from its seed.
    pub lineage: Vec<MutationKind>,
}

/// On-disk `task.toml`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    id: String,
    #[serde(default)]
    language_tag: LanguageTag,
    #[serde(default = "default_time_limit")]
    time_limit_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timing_case: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    lineage: Vec<MutationKind>,
    #[serde(default)]
    toolchain: Option<ToolchainPolicy>,
}

fn default_time_limit() -> f64 {
    10.0
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), TaskError> {
        if self.id.trim().is_empty() {
            return Err(TaskError::Invalid("id must be non-empty".into()));
        }
        if self.tests.is_empty() {
            return Err(TaskError::Invalid(format!(
                "task {} has neither test cases nor a harness",
                self.id
            )));
        }
        if self.time_limit.is_zero() {
            return Err(TaskError::Invalid("time_limit must be > 0".into()));
        }
        if let Some(i) = self.timing_case {
            if i >= self.tests.cases.len() {
                return Err(TaskError::Invalid(format!("timing case {i} out of range")));
            }
        }
        self.toolchain.validate()
    }

    pub fn source_file_name(&self) -> &str {
        self.toolchain
            .source_file
            .as_deref()
            .unwrap_or_else(|| self.language_tag.default_source_file())
    }

    /// Loads a task directory: `problem.md`, `task.toml`, `tests/NN.in` +
    /// `tests/NN.out` and/or `harness.src`, optional `seed.src` and
    /// `baseline_seq.src`.
    pub fn load(dir: &Path) -> Result<TaskSpec, TaskError> {
        let problem = dir.join("problem.md");
        if !problem.is_file() {
            return Err(TaskError::MissingFile(dir.to_path_buf(), "problem.md"));
        }
        let config_path = dir.join("task.toml");
        if !config_path.is_file() {
            return Err(TaskError::MissingFile(dir.to_path_buf(), "task.toml"));
        }
        let description = fs::read_to_string(&problem).map_err(io_err(&problem))?;
        let raw = fs::read_to_string(&config_path).map_err(io_err(&config_path))?;
        let file: TaskFile = toml::from_str(&raw).map_err(|e| TaskError::Config {
            path: config_path.clone(),
            message: e.to_string(),
        })?;

        let cases = load_cases(&dir.join("tests"))?;
        let optional = |name: &str| -> Result<Option<String>, TaskError> {
            let p = dir.join(name);
            if p.is_file() {
                fs::read_to_string(&p).map(Some).map_err(io_err(&p))
            } else {
                Ok(None)
            }
        };
        let harness = optional("harness.src")?;

        let timing_case = match &file.timing_case {
            None => None,
            Some(name) => Some(
                cases
                    .iter()
                    .position(|c| &c.id == name)
                    .ok_or_else(|| TaskError::Invalid(format!("timing_case {name} names no test case")))?,
            ),
        };
        if !(file.time_limit_secs.is_finite() && file.time_limit_secs > 0.0) {
            return Err(TaskError::Invalid("time_limit_secs must be > 0".into()));
        }

        let task = TaskSpec {
            id: file.id,
            description,
            tests: TestSuite { cases, harness },
            toolchain: file
                .toolchain
                .unwrap_or_else(|| ToolchainPolicy::for_language(file.language_tag)),
            seed_solution: optional("seed.src")?,
            sequential_baseline: optional("baseline_seq.src")?,
            time_limit: Duration::from_secs_f64(file.time_limit_secs),
            language_tag: file.language_tag,
            timing_case,
            lineage: file.lineage,
        };
        task.validate()?;
        Ok(task)
    }

    /// Writes the task in the layout [`TaskSpec::load`] reads.
    pub fn save(&self, dir: &Path) -> Result<(), TaskError> {
        let write = |name: &str, text: &str| -> Result<(), TaskError> {
            let p = dir.join(name);
            if let Some(parent) = p.parent() {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            fs::write(&p, text).map_err(io_err(&p))
        };
        let file = TaskFile {
            id: self.id.clone(),
            language_tag: self.language_tag,
            time_limit_secs: self.time_limit.as_secs_f64(),
            timing_case: self.timing_case.map(|i| self.tests.cases[i].id.clone()),
            lineage: self.lineage.clone(),
            toolchain: Some(self.toolchain.clone()),
        };
        let toml_text = toml::to_string(&file).map_err(|e| TaskError::Config {
            path: dir.join("task.toml"),
            message: e.to_string(),
        })?;
        write("problem.md", &self.description)?;
        write("task.toml", &toml_text)?;
        for case in &self.tests.cases {
            write(&format!("tests/{}.in", case.id), &case.input)?;
            write(&format!("tests/{}.out", case.id), &case.expected)?;
        }
        if let Some(h) = &self.tests.harness {
            write("harness.src", h)?;
        }
        if let Some(s) = &self.seed_solution {
            write("seed.src", s)?;
        }
        if let Some(s) = &self.sequential_baseline {
            write("baseline_seq.src", s)?;
        }
        Ok(())
    }

    pub fn timing_case(&self) -> Option<&TestCase> {
        match self.timing_case {
            Some(i) => self.tests.cases.get(i),
            None => self.tests.cases.last(),
        }
    }
}

fn load_cases(tests_dir: &Path) -> Result<Vec<TestCase>, TaskError> {
    if !tests_dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut stems: Vec<String> = fs::read_dir(tests_dir)
        .map_err(io_err(tests_dir))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "in"))
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    stems.sort();
    stems
        .into_iter()
        .map(|id| {
            let inp = tests_dir.join(format!("{id}.in"));
            let out = tests_dir.join(format!("{id}.out"));
            if !out.is_file() {
                return Err(TaskError::Invalid(format!("{} has no matching .out", inp.display())));
            }
            Ok(TestCase {
                input: fs::read_to_string(&inp).map_err(io_err(&inp))?,
                expected: fs::read_to_string(&out).map_err(io_err(&out))?,
                id,
            })
        })
        .collect()
}

/// Hex SHA-256 of normalized source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(String);

impl CandidateId {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn short(&self) -> &str {
        &self.0[..self.0.len().min(12)]
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for CandidateId {
    fn from(s: &str) -> Self {
        CandidateId(s.to_string())
    }
}

/// Comments stripped, whitespace runs collapsed to one space, ends trimmed.
pub fn normalize_source(source: &str, lang: LanguageTag) -> String {
    lexer::collapse_whitespace(&lexer::strip_comments(source, lang))
}

pub fn normalize_and_hash(source: &str, lang: LanguageTag) -> CandidateId {
    let digest = Sha256::digest(normalize_source(source, lang).as_bytes());
    CandidateId(hex::encode(digest))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Seed,
    Generated,
    Mutated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub source: String,
    pub id: CandidateId,
    pub generation: u32,
    pub parent_ids: Vec<CandidateId>,
    pub origin: Origin,
}

impl Candidate {
    pub fn seed(source: impl Into<String>, lang: LanguageTag) -> Candidate {
        let source = source.into();
        Candidate {
            id: normalize_and_hash(&source, lang),
            source,
            generation: 0,
            parent_ids: Vec::new(),
            origin: Origin::Seed,
        }
    }

    /// A generated or mutated candidate; `generation` must exceed every parent's.
    pub fn derived(
        source: impl Into<String>,
        lang: LanguageTag,
        generation: u32,
        parents: &[&Candidate],
        origin: Origin,
    ) -> Result<Candidate, TaskError> {
        if origin == Origin::Seed {
            return Err(TaskError::Candidate("derived candidates cannot be seeds".into()));
        }
        if let Some(max) = parents.iter().map(|p| p.generation).max() {
            if generation <= max {
                return Err(TaskError::Candidate(format!(
                    "generation {generation} does not exceed parent generation {max}"
                )));
            }
        }
        let source = source.into();
        Ok(Candidate {
            id: normalize_and_hash(&source, lang),
            source,
            generation,
            parent_ids: parents.iter().map(|p| p.id.clone()).collect(),
            origin,
        })
    }
}
