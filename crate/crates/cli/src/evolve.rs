use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use evoforge::engine::{persist_run, run_evolution, Event};
use evoforge::task::TaskSpec;

use crate::config::{Config, EvaluatorKind};
use crate::manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_VALID: i32 = 2;

#[derive(Debug, clap::Args)]
pub struct EvolveArgs {
    /// Task directory (problem.md, task.toml, tests/ ...).
    #[arg(long)]
    pub task: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `mock:<playlist.toml>` or `endpoint:<url>`.
    #[arg(long)]
    pub generator: String,
    #[arg(long)]
    pub iterations: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Concurrent evaluations (0 = all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub keep_artifacts: bool,
    #[arg(long, value_enum)]
    pub evaluator: Option<EvaluatorKind>,
    /// Parent directory for run directories.
    #[arg(long, default_value = "runs")]
    pub out: PathBuf,
    /// Run directory name; defaults to `<task id>-<timestamp>`.
    #[arg(long)]
    pub run_id: Option<String>,
}

fn effective_config(args: &EvolveArgs) -> Result<Config> {
    let mut cfg = Config::load(args.config.as_deref())?;
    if let Some(n) = args.iterations {
        cfg.engine.iterations = n;
    }
    if let Some(s) = args.seed {
        cfg.engine.rng_seed = s;
    }
    if let Some(j) = args.jobs {
        cfg.engine.jobs = j;
    }
    if args.keep_artifacts {
        cfg.evaluator.keep_artifacts = true;
    }
    if let Some(k) = args.evaluator {
        cfg.evaluator.kind = k;
    }
    cfg.engine.validate()?;
    Ok(cfg)
}

fn append_error(dir: &Path, message: &str) {
    let line = serde_json::to_string(&Event::Error {
        message: message.to_string(),
    })
    .expect("event serializes");
    let res = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join("events.jsonl"))
        .and_then(|mut f| writeln!(f, "{line}"));
    if let Err(e) = res {
        log::error!("could not log to events.jsonl: {e}");
    }
}

fn default_run_id(task_dir: &Path) -> String {
    let name = task_dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "task".into());
    format!("{name}-{}", chrono::Utc::now().format("%Y%m%dT%H%M%S%.3f"))
}

/// Runs the search and returns the process exit code. The run directory
/// is created first so every failure lands in its `events.jsonl`.
pub fn cmd_evolve(args: &EvolveArgs) -> i32 {
    let run_id = args.run_id.clone().unwrap_or_else(|| default_run_id(&args.task));
    let dir = args.out.join(&run_id);
    if let Err(e) = fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return EXIT_ERROR;
    }
    let _ = fs::remove_file(dir.join("events.jsonl"));
    let mut manifest = RunManifest::begin(&run_id, String::new());
    let (code, outcome) = match evolve_inner(args, &dir, &mut manifest) {
        Ok((code, outcome)) => (code, outcome),
        Err(e) => {
            let msg = format!("{e:#}");
            eprintln!("error: {msg}");
            append_error(&dir, &msg);
            manifest.artifacts.push(dir.join("events.jsonl"));
            (EXIT_ERROR, format!("error: {msg}"))
        }
    };
    match manifest.finish(&dir, code, &outcome) {
        Ok(_) => code,
        Err(e) => {
            eprintln!("error: writing manifest: {e}");
            EXIT_ERROR
        }
    }
}

fn evolve_inner(args: &EvolveArgs, dir: &Path, manifest: &mut RunManifest) -> Result<(i32, String)> {
    let cfg = effective_config(args)?;
    let snapshot = cfg.snapshot();
    manifest.config_snapshot = snapshot.clone();
    let config_path = dir.join("config.snapshot");
    fs::write(&config_path, &snapshot)?;
    manifest.artifacts.push(config_path);

    let task = TaskSpec::load(&args.task).with_context(|| format!("loading task {}", args.task.display()))?;
    task.validate()?;
    let mut generator = cfg.generator.build(&args.generator)?;
    let evaluator = cfg.evaluator.build(&dir.join("work"), cfg.engine.jobs);

    log::info!(
        "evolving {} for {} iterations with {}",
        task.id,
        cfg.engine.iterations,
        generator.id()
    );
    let result = run_evolution(&task, generator.as_mut(), evaluator.as_ref(), &cfg.engine)?;
    let files = persist_run(dir, &snapshot, &result)?;
    manifest.artifacts.extend(files.all());

    Ok(match &result.best {
        Some(best) => {
            let speedup = result.iteration_speedup().unwrap_or(1.0);
            let msg = format!(
                "best {} (generation {}, runtime {:.6}s, fitness {:.6}); speedup over first valid {speedup:.4}x",
                best.candidate.id.short(),
                best.candidate.generation,
                best.report.runtime.map_or(0.0, |d| d.as_secs_f64()),
                best.fitness.value()
            );
            println!("{msg}");
            println!("run directory: {}", dir.display());
            (EXIT_OK, msg)
        }
        None => {
            let msg = "no valid solution".to_string();
            println!("{msg}");
            println!("run directory: {}", dir.display());
            (EXIT_NO_VALID, msg)
        }
    })
}
