use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use evoforge::corpus::{
    build_comparison_examples, clean_execution_logs, critic_batch, extract_perf_pairs, mutate_task, read_corpus,
    read_holdout, read_jsonl, serialize_corpus, CorpusRecord, CriticVerdict, ExecutionLogRecord, MutationKind,
};
use evoforge::engine::Trajectory;
use evoforge::task::{LanguageTag, TaskSpec};

use crate::config::{Config, EvaluatorKind};

#[derive(Debug, clap::Subcommand)]
pub enum SynthCommand {
    /// Mutate a seed task (one or more kinds, applied in order).
    Mutate {
        #[arg(long)]
        task: PathBuf,
        /// type, cons or algo; repeat to chain.
        #[arg(long = "kind", required = true)]
        kinds: Vec<String>,
        #[arg(long)]
        generator: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving the new task directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Keep only (problem, code) pairs that build and pass.
    Critic {
        /// JSONL lines of {"task": <dir>, "code": <file>}, relative to this file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        evaluator: Option<EvaluatorKind>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value = "unknown")]
        generator_id: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Slow/fast pairs from a run's trajectory.
    Pairs {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long)]
        task_id: String,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "cxx-parlay")]
        language: Lang,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise comparison examples from perf_pair records.
    Compare {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Clean execution-log records.
    Clean {
        #[arg(long)]
        logs: PathBuf,
        /// One held-out task id per line.
        #[arg(long)]
        holdout: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Lang {
    CxxParlay,
    RustRayon,
    Other,
}

impl From<Lang> for LanguageTag {
    fn from(l: Lang) -> Self {
        match l {
            Lang::CxxParlay => LanguageTag::CxxParlay,
            Lang::RustRayon => LanguageTag::RustRayon,
            Lang::Other => LanguageTag::Other,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CriticInput {
    task: PathBuf,
    code: PathBuf,
}

fn write(records: &[CorpusRecord], out: &Path) -> Result<()> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    serialize_corpus(records, out)?;
    Ok(())
}

/// Execution logs: either tagged corpus lines or bare records.
fn read_logs(path: &Path) -> Result<Vec<ExecutionLogRecord>> {
    if let Ok(records) = read_corpus(path) {
        return records
            .into_iter()
            .map(|r| match r {
                CorpusRecord::ExecutionLog(l) => Ok(l),
                other => bail!("{}: expected execution_log records, found {other:?}", path.display()),
            })
            .collect();
    }
    Ok(read_jsonl(path)?)
}

pub fn cmd_synthesize(cmd: &SynthCommand) -> Result<()> {
    match cmd {
        SynthCommand::Mutate {
            task,
            kinds,
            generator,
            config,
            seed,
            out,
        } => {
            let cfg = Config::load(config.as_deref())?;
            let seed = seed.unwrap_or(cfg.corpus.seed);
            let mut current = TaskSpec::load(task)?;
            let mut g = cfg.generator.build(generator)?;
            for (i, k) in kinds.iter().enumerate() {
                let kind = MutationKind::parse(k).with_context(|| format!("unknown mutation kind {k:?}"))?;
                current = mutate_task(&current, kind, g.as_mut(), seed.wrapping_add(i as u64))?;
            }
            let dest = out.join(&current.id);
            current.save(&dest)?;
            println!("{}", dest.display());
        }
        SynthCommand::Critic {
            input,
            config,
            evaluator,
            jobs,
            generator_id,
            out,
        } => {
            let mut cfg = Config::load(config.as_deref())?;
            if let Some(k) = evaluator {
                cfg.evaluator.kind = *k;
            }
            if let Some(j) = jobs {
                cfg.corpus.critic.jobs = *j;
            }
            let base = input.parent().unwrap_or(Path::new("."));
            let entries: Vec<CriticInput> = read_jsonl(input)?;
            let mut pairs = Vec::new();
            for e in entries {
                let task = TaskSpec::load(&base.join(&e.task))?;
                let code_path = base.join(&e.code);
                let code = fs::read_to_string(&code_path).with_context(|| code_path.display().to_string())?;
                pairs.push((task, code));
            }
            let work = std::env::temp_dir().join(format!("evoforge-critic-{}", std::process::id()));
            let ev = cfg.evaluator.build(&work, cfg.corpus.critic.jobs);
            let verdicts = critic_batch(&pairs, ev.as_ref(), generator_id, &cfg.corpus.critic);
            let _ = fs::remove_dir_all(&work);
            let (mut rejected, mut infra) = (0, 0);
            let mut records = Vec::new();
            for v in verdicts {
                match v {
                    CriticVerdict::Accepted(r) => records.push(CorpusRecord::Instruction(r)),
                    CriticVerdict::Rejected { .. } => rejected += 1,
                    CriticVerdict::Infra { .. } => infra += 1,
                }
            }
            write(&records, out)?;
            println!("accepted {} rejected {rejected} infra {infra}", records.len());
        }
        SynthCommand::Pairs {
            trajectory,
            task_id,
            threshold,
            language,
            config,
            out,
        } => {
            let cfg = Config::load(config.as_deref())?;
            let t = Trajectory::read_jsonl(trajectory)?;
            let pairs = extract_perf_pairs(
                task_id,
                &t,
                threshold.unwrap_or(cfg.corpus.pair_threshold),
                (*language).into(),
            );
            let records: Vec<CorpusRecord> = pairs.into_iter().map(CorpusRecord::PerfPair).collect();
            write(&records, out)?;
            println!("{} pairs", records.len());
        }
        SynthCommand::Compare {
            pairs,
            seed,
            config,
            out,
        } => {
            let cfg = Config::load(config.as_deref())?;
            let mut perf = Vec::new();
            for r in read_corpus(pairs)? {
                match r {
                    CorpusRecord::PerfPair(p) => perf.push(p),
                    other => bail!("{}: expected perf_pair records, found {other:?}", pairs.display()),
                }
            }
            let examples = build_comparison_examples(&perf, seed.unwrap_or(cfg.corpus.seed));
            let records: Vec<CorpusRecord> = examples.into_iter().map(CorpusRecord::Comparison).collect();
            write(&records, out)?;
            println!("{} examples ({} skipped)", records.len(), perf.len() - records.len());
        }
        SynthCommand::Clean { logs, holdout, out } => {
            let records = read_logs(logs)?;
            let holdout = match holdout {
                Some(p) => read_holdout(p)?,
                None => HashSet::new(),
            };
            let cleaned = clean_execution_logs(&records, &holdout);
            let n = cleaned.len();
            write(
                &cleaned.into_iter().map(CorpusRecord::ExecutionLog).collect::<Vec<_>>(),
                out,
            )?;
            println!("kept {n} of {}", records.len());
        }
    }
    Ok(())
}
