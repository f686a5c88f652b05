use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use evoforge::archive::Archive;
use evoforge::engine::Trajectory;

use crate::manifest::RunManifest;

/// Human-readable summary of a persisted evolve run.
pub fn render_run(dir: &Path) -> Result<String> {
    let manifest = RunManifest::read(dir).with_context(|| format!("{} is not a run directory", dir.display()))?;
    let mut s = String::new();
    writeln!(
        s,
        "run {}  exit {}  {}",
        manifest.run_id, manifest.exit_code, manifest.outcome
    )?;
    writeln!(s, "started {}  finished {}", manifest.started_at, manifest.finished_at)?;

    let tpath = dir.join("trajectory.jsonl");
    if !tpath.exists() {
        writeln!(s, "no trajectory recorded")?;
        return Ok(s);
    }
    let t = Trajectory::read_jsonl(&tpath)?;
    writeln!(
        s,
        "\n{:>4}  {:>6}  {:>6}  {:>14}  {:>14}",
        "gen", "scored", "valid", "best runtime s", "best fitness"
    )?;
    for g in &t.generations {
        let valid: Vec<_> = g.entries.iter().filter(|e| e.is_valid()).collect();
        let best = valid.iter().max_by(|a, b| a.fitness.total_cmp(&b.fitness));
        writeln!(
            s,
            "{:>4}  {:>6}  {:>6}  {:>14}  {:>14}",
            g.generation,
            g.entries.len(),
            valid.len(),
            best.and_then(|e| e.report.runtime_secs)
                .map_or("-".into(), |r| format!("{r:.6}")),
            best.map_or("-".into(), |e| format!("{:.6}", e.fitness)),
        )?;
    }
    match (&t.first_valid, &t.best) {
        (Some(f), Some(b)) => {
            writeln!(s, "\nfirst valid  gen {} {}", f.generation, f.candidate_id.short())?;
            writeln!(s, "best         gen {} {}", b.generation, b.candidate_id.short())?;
            match t.iteration_speedup() {
                Ok(x) => writeln!(s, "iteration speedup {x:.4}x")?,
                Err(e) => writeln!(s, "iteration speedup unavailable: {e}")?,
            }
        }
        _ => writeln!(s, "\nno valid solution")?,
    }

    let apath = dir.join("archive.snapshot");
    if apath.exists() {
        let archive = Archive::read_snapshot(&apath, Default::default())?;
        writeln!(s, "archive: {} occupied cell(s)", archive.len())?;
    }
    Ok(s)
}
