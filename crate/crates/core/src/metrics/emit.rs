use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{expected_speedup, TaskMetrics};

const COLUMNS: [&str; 4] = ["task", "build_at_1", "pass_at_1", "mean_speedup_at_1"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" | "table-text" | "text" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format {other:?} (expected table, csv or json)")),
        }
    }
}

/// `expected_speedup` is `None` exactly when there are no tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub task_count: usize,
    pub expected_speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub tasks: Vec<TaskMetrics>,
    pub summary: Summary,
}

impl BenchReport {
    pub fn new(tasks: Vec<TaskMetrics>) -> Self {
        let means: Vec<f64> = tasks.iter().map(|t| t.mean_speedup_at_1).collect();
        BenchReport {
            summary: Summary {
                task_count: tasks.len(),
                expected_speedup: expected_speedup(&means).ok(),
            },
            tasks,
        }
    }
}

/// CSV carries the task rows only (header first); table and JSON also carry
/// the summary, with an explicit marker when there are no tasks.
pub fn render_report(report: &BenchReport, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
            w.write_record(COLUMNS).expect("in-memory write");
            for t in &report.tasks {
                w.serialize(t).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Table => {
            let width = report.tasks.iter().map(|t| t.task.len()).max().unwrap_or(0).max(4);
            let mut s = format!(
                "{:<width$}  {:>8}  {:>8}  {:>12}\n",
                "task", "Build@1", "Pass@1", "Speedup@1"
            );
            for t in &report.tasks {
                s.push_str(&format!(
                    "{:<width$}  {:>8.4}  {:>8.4}  {:>12.4}\n",
                    t.task, t.build_at_1, t.pass_at_1, t.mean_speedup_at_1
                ));
            }
            match report.summary.expected_speedup {
                Some(e) => s.push_str(&format!(
                    "expected speedup over {} task(s): {e:.4}\n",
                    report.summary.task_count
                )),
                None => s.push_str("expected speedup: none (empty suite)\n"),
            }
            s
        }
    }
}

pub fn emit_report(report: &BenchReport, path: &Path, format: Format) -> std::io::Result<()> {
    fs::write(path, render_report(report, format))
}

/// Reads back a CSV or JSON report. The CSV summary is recomputed from the rows.
pub fn parse_report(text: &str, format: Format) -> Result<BenchReport, String> {
    match format {
        Format::Json => serde_json::from_str(text).map_err(|e| e.to_string()),
        Format::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let header = r.headers().map_err(|e| e.to_string())?.clone();
            if header.iter().ne(COLUMNS) {
                return Err(format!("unexpected columns: {:?}", header.iter().collect::<Vec<_>>()));
            }
            let tasks = r
                .deserialize::<TaskMetrics>()
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            Ok(BenchReport::new(tasks))
        }
        Format::Table => Err("table reports are not machine-readable".into()),
    }
}
