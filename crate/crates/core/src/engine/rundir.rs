use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::EvolutionResult;

/// Paths written by [`persist_run`]. `best_source` is `None` when the run
/// found no valid solution.
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub config_snapshot: PathBuf,
    pub events: PathBuf,
    pub archive_snapshot: PathBuf,
    pub trajectory: PathBuf,
    pub best_source: Option<PathBuf>,
}

impl RunFiles {
    pub fn all(&self) -> Vec<PathBuf> {
        let mut v = vec![
            self.config_snapshot.clone(),
            self.events.clone(),
            self.archive_snapshot.clone(),
            self.trajectory.clone(),
        ];
        v.extend(self.best_source.clone());
        v
    }
}

/// Writes `config.snapshot`, `events.jsonl`, `archive.snapshot`,
/// `trajectory.jsonl` and (when a valid solution exists) `best.src`.
pub fn persist_run(dir: &Path, config_snapshot: &str, result: &EvolutionResult) -> std::io::Result<RunFiles> {
    fs::create_dir_all(dir)?;
    let files = RunFiles {
        config_snapshot: dir.join("config.snapshot"),
        events: dir.join("events.jsonl"),
        archive_snapshot: dir.join("archive.snapshot"),
        trajectory: dir.join("trajectory.jsonl"),
        best_source: result.best.as_ref().map(|_| dir.join("best.src")),
    };
    fs::write(&files.config_snapshot, config_snapshot)?;

    let mut events = std::io::BufWriter::new(fs::File::create(&files.events)?);
    for e in &result.events {
        serde_json::to_writer(&mut events, e)?;
        events.write_all(b"\n")?;
    }
    events.flush()?;

    result
        .archive
        .write_snapshot(&files.archive_snapshot)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    result
        .trajectory
        .write_jsonl(&files.trajectory)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    if let (Some(best), Some(path)) = (&result.best, &files.best_source) {
        fs::write(path, &best.candidate.source)?;
    } else {
        let stale = dir.join("best.src");
        if stale.exists() {
            fs::remove_file(stale)?;
        }
    }
    Ok(files)
}
