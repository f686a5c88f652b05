use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

/// What ran, with which configuration, and what it left behind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: Vec<String>,
    pub config_snapshot: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub exit_code: i32,
    pub outcome: String,
    pub artifacts: Vec<PathBuf>,
}

impl RunManifest {
    pub fn begin(run_id: &str, config_snapshot: String) -> Self {
        let now = Utc::now();
        RunManifest {
            run_id: run_id.to_string(),
            command: std::env::args().collect(),
            config_snapshot,
            started_at: now,
            finished_at: now,
            exit_code: 0,
            outcome: String::new(),
            artifacts: Vec::new(),
        }
    }

    /// Stamps the end time, drops artifact paths that do not exist, and
    /// writes `manifest.json` into `dir` (listing itself).
    pub fn finish(mut self, dir: &Path, exit_code: i32, outcome: &str) -> std::io::Result<RunManifest> {
        self.finished_at = Utc::now();
        self.exit_code = exit_code;
        self.outcome = outcome.to_string();
        let path = dir.join(MANIFEST_FILE);
        self.artifacts.retain(|p| p.exists() && *p != path);
        self.artifacts.sort();
        self.artifacts.dedup();
        self.artifacts.push(path.clone());
        std::fs::write(&path, serde_json::to_string_pretty(&self)? + "\n")?;
        Ok(self)
    }

    pub fn read(dir: &Path) -> anyhow::Result<RunManifest> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }
}
