use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::report::ReportSummary;
use crate::task::{CandidateId, Origin};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    pub generation: u32,
    pub candidate_id: CandidateId,
    pub origin: Origin,
    pub parent_ids: Vec<CandidateId>,
    pub report: ReportSummary,
    pub fitness: f64,
    pub source: String,
}

impl TrajectoryEntry {
    /// Passed tests, was race-clean and has a runtime.
    pub fn is_valid(&self) -> bool {
        self.fitness > 0.0 && self.report.runtime_secs.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u32,
    pub entries: Vec<TrajectoryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub generation: u32,
    pub candidate_id: CandidateId,
    pub fitness: f64,
    pub runtime_secs: Option<f64>,
}

/// Every candidate the run scored, in evaluation order, plus the first
/// valid solution and the global best.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub generations: Vec<GenerationRecord>,
    pub first_valid: Option<Marker>,
    pub best: Option<Marker>,
}

#[derive(Debug, thiserror::Error)]
pub enum TrajectoryError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Line {
    Generation(GenerationRecord),
    Summary {
        first_valid: Option<Marker>,
        best: Option<Marker>,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpeedupError {
    #[error("trajectory has no valid solution to use as the baseline")]
    NoFirstValid,
    #[error("baseline or best solution has no recorded runtime")]
    MissingRuntime,
}

impl Trajectory {
    pub fn entries(&self) -> impl Iterator<Item = &TrajectoryEntry> {
        self.generations.iter().flat_map(|g| g.entries.iter())
    }

    /// Appends a scored entry, updating the first-valid and best markers.
    /// Best is replaced only on strictly greater fitness.
    pub fn record(&mut self, entry: TrajectoryEntry) {
        let marker = Marker {
            generation: entry.generation,
            candidate_id: entry.candidate_id.clone(),
            fitness: entry.fitness,
            runtime_secs: entry.report.runtime_secs,
        };
        if entry.is_valid() {
            if self.first_valid.is_none() {
                self.first_valid = Some(marker.clone());
            }
            if self.best.as_ref().is_none_or(|b| entry.fitness > b.fitness) {
                self.best = Some(marker);
            }
        }
        match self.generations.last_mut() {
            Some(g) if g.generation == entry.generation => g.entries.push(entry),
            _ => self.generations.push(GenerationRecord {
                generation: entry.generation,
                entries: vec![entry],
            }),
        }
    }

    /// T(first valid) / T(best).
    pub fn iteration_speedup(&self) -> Result<f64, SpeedupError> {
        let first = self.first_valid.as_ref().ok_or(SpeedupError::NoFirstValid)?;
        let best = self.best.as_ref().ok_or(SpeedupError::NoFirstValid)?;
        if first.candidate_id == best.candidate_id {
            return Ok(1.0);
        }
        match (first.runtime_secs, best.runtime_secs) {
            (Some(base), Some(opt)) if opt > 0.0 => Ok(base / opt),
            _ => Err(SpeedupError::MissingRuntime),
        }
    }

    /// One JSON line per generation followed by a summary line.
    pub fn write_jsonl(&self, path: &Path) -> Result<(), TrajectoryError> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        for g in &self.generations {
            serde_json::to_writer(&mut w, &Line::Generation(g.clone())).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        let summary = Line::Summary {
            first_valid: self.first_valid.clone(),
            best: self.best.clone(),
        };
        serde_json::to_writer(&mut w, &summary).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    /// Reads a trajectory file. Markers are recomputed from the entries when
    /// no summary line is present.
    pub fn read_jsonl(path: &Path) -> Result<Trajectory, TrajectoryError> {
        let mut generations = Vec::new();
        let mut summary = None;
        for (i, line) in BufReader::new(fs::File::open(path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Line>(&line).map_err(|e| TrajectoryError::Parse {
                line: i + 1,
                message: e.to_string(),
            })? {
                Line::Generation(g) => generations.push(g),
                Line::Summary { first_valid, best } => summary = Some((first_valid, best)),
            }
        }
        Ok(match summary {
            Some((first_valid, best)) => Trajectory {
                generations,
                first_valid,
                best,
            },
            None => {
                let mut t = Trajectory::default();
                for e in generations.into_iter().flat_map(|g| g.entries) {
                    t.record(e);
                }
                t
            }
        })
    }
}
