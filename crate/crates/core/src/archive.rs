//! MAP-Elites archive and survivor selection.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::{BinConfig, FeatureDescriptor};
use crate::fitness::FitnessScore;
use crate::task::CandidateId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Elite {
    pub candidate_id: CandidateId,
    pub fitness: FitnessScore,
    pub generation: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    AcceptedAsElite,
    Rejected,
}

/// Ordering used everywhere a "better" candidate is needed: higher fitness,
/// then newer generation, then lexicographically smaller id.
pub fn rank(a: (FitnessScore, u32, &CandidateId), b: (FitnessScore, u32, &CandidateId)) -> Ordering {
    b.0.total_cmp(&a.0)
        .then_with(|| b.1.cmp(&a.1))
        .then_with(|| a.2.cmp(b.2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    cells: BTreeMap<FeatureDescriptor, Elite>,
    bins: BinConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
struct SnapshotRecord {
    descriptor: FeatureDescriptor,
    candidate_id: CandidateId,
    fitness: f64,
    generation: u32,
}

impl Archive {
    pub fn new(bins: BinConfig) -> Self {
        Archive {
            cells: BTreeMap::new(),
            bins,
        }
    }

    pub fn bins(&self) -> &BinConfig {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, d: &FeatureDescriptor) -> Option<&Elite> {
        self.cells.get(d)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&FeatureDescriptor, &Elite)> {
        self.cells.iter()
    }

    /// Empty cells accept anything, including zero-fitness candidates. An
    /// occupied cell is taken over only by a better candidate under [`rank`].
    pub fn insert(
        &mut self,
        candidate_id: &CandidateId,
        fitness: FitnessScore,
        generation: u32,
        features: FeatureDescriptor,
    ) -> InsertOutcome {
        assert!(
            self.bins.contains(&features),
            "descriptor {features:?} outside the grid"
        );
        let incoming = Elite {
            candidate_id: candidate_id.clone(),
            fitness,
            generation,
        };
        match self.cells.get_mut(&features) {
            None => {
                self.cells.insert(features, incoming);
                InsertOutcome::AcceptedAsElite
            }
            Some(current) => {
                let better = rank(
                    (incoming.fitness, incoming.generation, &incoming.candidate_id),
                    (current.fitness, current.generation, &current.candidate_id),
                ) == Ordering::Less;
                if better {
                    *current = incoming;
                    InsertOutcome::AcceptedAsElite
                } else {
                    InsertOutcome::Rejected
                }
            }
        }
    }

    /// One JSON record per occupied cell, in descriptor order.
    pub fn write_snapshot(&self, path: &Path) -> Result<(), SnapshotError> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        for (d, e) in &self.cells {
            let rec = SnapshotRecord {
                descriptor: *d,
                candidate_id: e.candidate_id.clone(),
                fitness: e.fitness.value(),
                generation: e.generation,
            };
            serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_snapshot(path: &Path, bins: BinConfig) -> Result<Archive, SnapshotError> {
        let mut archive = Archive::new(bins);
        for (i, line) in BufReader::new(fs::File::open(path)?).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parse_err = |message: String| SnapshotError::Parse { line: i + 1, message };
            let rec: SnapshotRecord = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
            if !archive.bins.contains(&rec.descriptor) {
                return Err(parse_err("descriptor outside the configured grid".into()));
            }
            let fitness = FitnessScore::from_stored(rec.fitness).ok_or_else(|| parse_err("invalid fitness".into()))?;
            archive.cells.insert(
                rec.descriptor,
                Elite {
                    candidate_id: rec.candidate_id,
                    fitness,
                    generation: rec.generation,
                },
            );
        }
        Ok(archive)
    }
}

/// One scored candidate eligible for survival.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMember {
    pub id: CandidateId,
    pub fitness: FitnessScore,
    pub generation: u32,
    pub features: FeatureDescriptor,
}

/// Top `k` of the population by [`rank`], then up to `d` archive elites drawn
/// uniformly without replacement from cells whose descriptor differs from
/// every top-k pick.
pub fn select_survivors(
    population: &[PopulationMember],
    archive: &Archive,
    k: usize,
    d: usize,
    rng_seed: u64,
) -> Vec<CandidateId> {
    let mut ranked: Vec<&PopulationMember> = population.iter().collect();
    ranked.sort_by(|a, b| rank((a.fitness, a.generation, &a.id), (b.fitness, b.generation, &b.id)));

    let mut chosen: Vec<CandidateId> = Vec::with_capacity(k + d);
    let mut chosen_ids: HashSet<&CandidateId> = HashSet::new();
    let mut taken: HashSet<FeatureDescriptor> = HashSet::new();
    for m in ranked {
        if chosen.len() == k {
            break;
        }
        if chosen_ids.insert(&m.id) {
            chosen.push(m.id.clone());
            taken.insert(m.features);
        }
    }

    let eligible: Vec<&Elite> = archive
        .cells
        .iter()
        .filter(|(desc, elite)| !taken.contains(desc) && !chosen_ids.contains(&elite.candidate_id))
        .map(|(_, e)| e)
        .collect();
    let amount = d.min(eligible.len());
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for i in rand::seq::index::sample(&mut rng, eligible.len(), amount) {
        chosen.push(eligible[i].candidate_id.clone());
    }
    chosen
}
