use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use evoforge::corpus::{CriticConfig, DEFAULT_PAIR_THRESHOLD};
use evoforge::engine::{CandidateGenerator, EndpointConfig, EndpointGenerator, EngineConfig, PlaylistGenerator};
use evoforge::harness::{Evaluator, StubEvaluator, SubprocessEvaluator};

/// The whole configuration file; one table per module.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub engine: EngineConfig,
    pub evaluator: EvaluatorSection,
    pub generator: GeneratorSection,
    pub corpus: CorpusSection,
    pub bench: BenchSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EvaluatorKind {
    /// Real toolchain in child processes.
    Subprocess,
    /// Verdicts read from `#pragma stub` directives in the source.
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluatorSection {
    pub kind: EvaluatorKind,
    /// Scratch root; defaults to `work/` inside the output directory.
    pub work_root: Option<PathBuf>,
    pub keep_artifacts: bool,
    /// Runtime reported by the stub evaluator when a source sets none.
    pub stub_default_runtime_secs: f64,
}

impl Default for EvaluatorSection {
    fn default() -> Self {
        EvaluatorSection {
            kind: EvaluatorKind::Subprocess,
            work_root: None,
            keep_artifacts: false,
            stub_default_runtime_secs: 1.0,
        }
    }
}

impl EvaluatorSection {
    pub fn build(&self, default_work_root: &Path, jobs: usize) -> Box<dyn Evaluator> {
        match self.kind {
            EvaluatorKind::Stub => Box::new(StubEvaluator {
                default_runtime: std::time::Duration::from_secs_f64(self.stub_default_runtime_secs),
            }),
            EvaluatorKind::Subprocess => {
                let root = self
                    .work_root
                    .clone()
                    .unwrap_or_else(|| default_work_root.to_path_buf());
                let mut e = SubprocessEvaluator::new(root).keep_artifacts(self.keep_artifacts);
                if jobs > 0 {
                    e = e.max_concurrent(jobs);
                }
                Box::new(e)
            }
        }
    }
}

/// Endpoint settings; the URL itself comes from `--generator endpoint:<url>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSection {
    pub model: String,
    pub auth_token_env: String,
    pub request_timeout_secs: f64,
    pub temperature: f64,
}

impl Default for GeneratorSection {
    fn default() -> Self {
        let e = EndpointConfig::new("");
        GeneratorSection {
            model: e.model,
            auth_token_env: e.auth_token_env,
            request_timeout_secs: e.request_timeout_secs,
            temperature: e.temperature,
        }
    }
}

impl GeneratorSection {
    /// Parses `mock:<playlist.toml>` or `endpoint:<url>`.
    pub fn build(&self, spec: &str) -> Result<Box<dyn CandidateGenerator>> {
        if let Some(path) = spec.strip_prefix("mock:") {
            let g = PlaylistGenerator::load(Path::new(path))?;
            return Ok(Box::new(g));
        }
        if let Some(url) = spec.strip_prefix("endpoint:") {
            if url.is_empty() {
                bail!("endpoint generator needs a URL");
            }
            return Ok(Box::new(EndpointGenerator::new(EndpointConfig {
                base_url: url.to_string(),
                model: self.model.clone(),
                auth_token_env: self.auth_token_env.clone(),
                request_timeout_secs: self.request_timeout_secs,
                temperature: self.temperature,
            })));
        }
        bail!("generator must be mock:<playlist> or endpoint:<url>, got {spec:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub pair_threshold: f64,
    pub seed: u64,
    pub critic: CriticConfig,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection {
            pair_threshold: DEFAULT_PAIR_THRESHOLD,
            seed: 0,
            critic: CriticConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    /// Thread counts for the scaling sweep; empty skips it.
    pub threads: Vec<u32>,
    /// Cap on samples per task; 0 uses all.
    pub samples: usize,
    pub format: String,
}

impl Default for BenchSection {
    fn default() -> Self {
        BenchSection {
            threads: Vec::new(),
            samples: 0,
            format: "table".into(),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn snapshot(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
