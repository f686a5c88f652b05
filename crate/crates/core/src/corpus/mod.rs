//! Training-corpus synthesis: task mutation, the compile-and-test critic,
//! slow/fast pair mining, pairwise comparison examples and execution-log
//! cleaning. Every record type serializes as one JSON object per line.

mod critic;
mod logs;
mod mutate;
mod pairs;

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use critic::{
    critic_accept, critic_batch, CriticConfig, CriticVerdict, InstructionRecord, Provenance, RejectStage,
};
pub use logs::{clean_execution_logs, ExecutionLogRecord, LogStatus};
pub use mutate::{mutate_task, parse_mutation, MutationError, PROBLEM_MARKER, SOLUTION_MARKER, TESTS_MARKER};
pub use pairs::{
    build_comparison_examples, extract_perf_pairs, ComparisonExample, Label, PerfPair, COMPARISON_INSTRUCTION,
    DEFAULT_PAIR_THRESHOLD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationKind {
    /// Swap the element type (e.g. integers to strings or a record type).
    #[serde(rename = "type_mutation")]
    Type,
    /// Add a predicate that forces composing primitives.
    #[serde(rename = "constraint_mutation")]
    Constraint,
    /// Change the problem's algorithmic shape (e.g. reduce to scan).
    #[serde(rename = "algorithmic_mutation")]
    Algorithmic,
}

impl MutationKind {
    pub const ALL: [MutationKind; 3] = [MutationKind::Type, MutationKind::Constraint, MutationKind::Algorithmic];

    /// Suffix appended to a task id for each mutation in its chain.
    pub fn suffix(self) -> &'static str {
        match self {
            MutationKind::Type => "type",
            MutationKind::Constraint => "cons",
            MutationKind::Algorithmic => "algo",
        }
    }

    pub fn parse(s: &str) -> Option<MutationKind> {
        match s {
            "type" | "type_mutation" => Some(MutationKind::Type),
            "cons" | "constraint" | "constraint_mutation" => Some(MutationKind::Constraint),
            "algo" | "algorithmic" | "algorithmic_mutation" => Some(MutationKind::Algorithmic),
            _ => None,
        }
    }
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorpusRecord {
    Instruction(InstructionRecord),
    PerfPair(PerfPair),
    Comparison(ComparisonExample),
    ExecutionLog(ExecutionLogRecord),
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("invalid record: {0}")]
    Invalid(String),
}

impl CorpusRecord {
    pub fn validate(&self) -> Result<(), CorpusError> {
        match self {
            CorpusRecord::Instruction(r) if !r.verified => {
                Err(CorpusError::Invalid("instruction record is not verified".into()))
            }
            CorpusRecord::PerfPair(p) => p.validate(DEFAULT_PAIR_THRESHOLD).map_err(CorpusError::Invalid),
            CorpusRecord::Comparison(c) => c.validate().map_err(CorpusError::Invalid),
            CorpusRecord::ExecutionLog(r) => r.validate().map_err(CorpusError::Invalid),
            _ => Ok(()),
        }
    }
}

/// Writes one record per line, validating each first. An empty slice
/// produces an empty file.
pub fn serialize_corpus(records: &[CorpusRecord], path: &Path) -> Result<(), CorpusError> {
    for r in records {
        r.validate()?;
    }
    let io = |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    write_records(records, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

pub fn write_records<W: Write>(records: &[CorpusRecord], mut w: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_corpus(path: &Path) -> Result<Vec<CorpusRecord>, CorpusError> {
    read_jsonl(path)
}

/// Reads any line-delimited JSON file, skipping blank lines.
pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let p = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| CorpusError::Io {
        path: p.clone(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: p.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            path: p.clone(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Holdout list: one task id per line; blank lines and `#` comments ignored.
pub fn read_holdout(path: &Path) -> Result<HashSet<String>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}
