use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};

use evoforge::metrics::{
    bench_report, emit_report, evaluate_suite, load_suite, measure_scaling, render_report, Format, ScalingCurve,
};

use crate::config::{Config, EvaluatorKind};
use crate::evolve::{EXIT_ERROR, EXIT_OK};
use crate::manifest::RunManifest;

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Directory of task directories, each with optional `completions/`.
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated thread counts for a scaling sweep, e.g. 1,2,4.
    #[arg(long, value_delimiter = ',')]
    pub threads: Option<Vec<u32>>,
    /// Use at most this many samples per task.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub evaluator: Option<EvaluatorKind>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// table, csv or json.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, default_value = "bench-out")]
    pub out: PathBuf,
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Table => "txt",
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

pub fn cmd_bench(args: &BenchArgs) -> i32 {
    match bench_inner(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn bench_inner(args: &BenchArgs) -> Result<i32> {
    let mut cfg = Config::load(args.config.as_deref())?;
    if let Some(k) = args.evaluator {
        cfg.evaluator.kind = k;
    }
    if let Some(t) = &args.threads {
        cfg.bench.threads = t.clone();
    }
    if let Some(n) = args.samples {
        cfg.bench.samples = n;
    }
    if let Some(f) = &args.format {
        cfg.bench.format = f.clone();
    }
    let format: Format = cfg.bench.format.parse().map_err(anyhow::Error::msg)?;
    let jobs = args.jobs.unwrap_or(cfg.engine.jobs);

    let mut suite = load_suite(&args.suite).with_context(|| format!("reading suite {}", args.suite.display()))?;
    if cfg.bench.samples > 0 {
        for t in &mut suite {
            t.samples.truncate(cfg.bench.samples);
        }
    }
    fs::create_dir_all(&args.out)?;
    let mut manifest = RunManifest::begin("bench", cfg.snapshot());
    let evaluator = cfg.evaluator.build(&args.out.join("work"), jobs);

    let run = evaluate_suite(&suite, evaluator.as_ref(), jobs);
    let samples_path = args.out.join("samples.jsonl");
    let mut w = std::io::BufWriter::new(fs::File::create(&samples_path)?);
    for s in &run.samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    manifest.artifacts.push(samples_path);

    let mut failures = run.infra_failures.clone();
    let report = match bench_report(&run.samples) {
        Ok(r) => Some(r),
        Err(e) => {
            failures.push(e.to_string());
            None
        }
    };
    if let Some(report) = &report {
        let path = args.out.join(format!("report.{}", extension(format)));
        emit_report(report, &path, format)?;
        manifest.artifacts.push(path);
        print!("{}", render_report(report, format));
    }

    if !cfg.bench.threads.is_empty() {
        let mut curves: Vec<ScalingCurve> = Vec::new();
        for (t, samples) in suite.iter().zip(suite.iter().map(|t| {
            run.samples
                .iter()
                .filter(|s| s.task_id == t.task.id)
                .collect::<Vec<_>>()
        })) {
            // fastest passing sample
            let best = samples.iter().filter(|s| s.passed).min_by(|a, b| {
                a.runtime_secs
                    .unwrap_or(f64::MAX)
                    .total_cmp(&b.runtime_secs.unwrap_or(f64::MAX))
            });
            let Some(best) = best else {
                log::warn!("{}: no passing sample to scale", t.task.id);
                continue;
            };
            match measure_scaling(
                evaluator.as_ref(),
                &t.task,
                &t.samples[best.sample_index],
                &cfg.bench.threads,
            ) {
                Ok(c) => {
                    if c.partial {
                        failures.push(format!("{}: scaling curve is partial", t.task.id));
                    }
                    curves.push(c)
                }
                Err(e) => failures.push(format!("{}: {e}", t.task.id)),
            }
        }
        let path = args.out.join("scaling.json");
        let body: Vec<serde_json::Value> = curves
            .iter()
            .map(|c| {
                let mut v = serde_json::to_value(c).expect("curve serializes");
                v["speedups"] = serde_json::to_value(c.speedups()).expect("speedups serialize");
                v
            })
            .collect();
        fs::write(&path, serde_json::to_string_pretty(&body)? + "\n")?;
        manifest.artifacts.push(path);
    }

    for f in &failures {
        eprintln!("error: {f}");
    }
    let code = if failures.is_empty() { EXIT_OK } else { EXIT_ERROR };
    let outcome = if failures.is_empty() {
        "all tasks evaluated".to_string()
    } else {
        format!("{} problem(s)", failures.len())
    };
    manifest.finish(&args.out, code, &outcome)?;
    Ok(code)
}
