//! The generational search loop.
//!
//! Each generation: prompt the generator with the current survivors, drop
//! sources already seen, evaluate the rest (concurrently), score, file into
//! the archive, and select the next survivors. The run returns the best
//! candidate seen at any point, not just in the final generation.

mod generator;
mod prompt;
mod rundir;
mod trajectory;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use generator::{
    strip_code_fences, CandidateGenerator, EndpointConfig, EndpointGenerator, FnGenerator, GenerationRequest,
    PlaylistError, PlaylistGenerator,
};
pub use prompt::{assemble_prompt, validate_template, SurvivorView, DEFAULT_TEMPLATE};
pub use rundir::{persist_run, RunFiles};
pub use trajectory::{GenerationRecord, Marker, SpeedupError, Trajectory, TrajectoryEntry, TrajectoryError};

use crate::archive::{select_survivors, Archive, InsertOutcome, PopulationMember};
use crate::features::{extract_features, BinConfig, FeatureDescriptor, TokenTable};
use crate::fitness::{compute_fitness, FitnessError, FitnessScore, DEFAULT_EPSILON_SECS};
use crate::harness::{Evaluator, Stages};
use crate::par;
use crate::report::{EvaluationReport, ReportSummary};
use crate::task::{Candidate, CandidateId, Origin, TaskSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Generations after generation 0.
    pub iterations: u32,
    pub population_per_generation: usize,
    /// Survivors taken by fitness.
    pub k: usize,
    /// Survivors drawn from distinct archive cells.
    pub d: usize,
    pub epsilon_secs: f64,
    pub rng_seed: u64,
    pub prompt_template: String,
    pub max_prompt_bytes: usize,
    /// Concurrent evaluations; 0 uses every core.
    pub jobs: usize,
    pub bins: BinConfig,
    /// Replaces the language's default synchronization lexicon when set.
    pub sync_lexicon: Option<Vec<String>>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            iterations: 10,
            population_per_generation: 4,
            k: 3,
            d: 5,
            epsilon_secs: DEFAULT_EPSILON_SECS,
            rng_seed: 0,
            prompt_template: DEFAULT_TEMPLATE.to_string(),
            max_prompt_bytes: 64 * 1024,
            jobs: 0,
            bins: BinConfig::default(),
            sync_lexicon: None,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: String| Err(EvolutionError::Config(m));
        if self.k + self.d == 0 {
            return bad("k + d must be at least 1".into());
        }
        if self.population_per_generation == 0 {
            return bad("population_per_generation must be at least 1".into());
        }
        if !(self.epsilon_secs.is_finite() && self.epsilon_secs > 0.0) {
            return bad("epsilon_secs must be positive".into());
        }
        if self.max_prompt_bytes == 0 {
            return bad("max_prompt_bytes must be positive".into());
        }
        validate_template(&self.prompt_template).map_err(EvolutionError::Config)?;
        self.bins.validate().map_err(EvolutionError::Config)
    }

    pub fn token_table(&self, task: &TaskSpec) -> TokenTable {
        let mut t = TokenTable::for_language(task.language_tag);
        if let Some(lex) = &self.sync_lexicon {
            t.sync_lexicon = lex.clone();
        }
        t
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EvolutionError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid task: {0}")]
    Task(#[from] crate::task::TaskError),
    #[error("generation 0 is empty: no seed solution and the generator returned no programs")]
    EmptyGeneration,
    #[error(transparent)]
    Fitness(#[from] FitnessError),
}

/// Everything the loop writes to `events.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Prompt {
        generation: u32,
        bytes: usize,
        digest: String,
    },
    Response {
        generation: u32,
        requested: usize,
        received: usize,
        digests: Vec<String>,
    },
    Duplicate {
        generation: u32,
        candidate_id: CandidateId,
    },
    Report {
        generation: u32,
        candidate_id: CandidateId,
        summary: ReportSummary,
        fitness: f64,
        elite: bool,
    },
    Selection {
        generation: u32,
        survivors: Vec<CandidateId>,
    },
    SkippedGeneration {
        generation: u32,
        reason: String,
    },
    Error {
        message: String,
    },
}

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Per-generation seed derived from the run seed (splitmix64 finalizer).
pub fn derive_seed(run_seed: u64, generation: u32, stream: u64) -> u64 {
    let mut z = run_seed
        .wrapping_add((generation as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(stream.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    pub report: EvaluationReport,
    pub fitness: FitnessScore,
    pub features: FeatureDescriptor,
}

impl ScoredCandidate {
    fn member(&self) -> PopulationMember {
        PopulationMember {
            id: self.candidate.id.clone(),
            fitness: self.fitness,
            generation: self.candidate.generation,
            features: self.features,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    /// Last generation that ran (0 after initialization).
    pub generation: u32,
    pub store: BTreeMap<CandidateId, ScoredCandidate>,
    pub archive: Archive,
    pub survivors: Vec<CandidateId>,
    pub trajectory: Trajectory,
    pub events: Vec<Event>,
    pub texts_requested: usize,
}

impl EvolutionState {
    pub fn new(config: &EngineConfig) -> Self {
        EvolutionState {
            generation: 0,
            store: BTreeMap::new(),
            archive: Archive::new(config.bins.clone()),
            survivors: Vec::new(),
            trajectory: Trajectory::default(),
            events: Vec::new(),
            texts_requested: 0,
        }
    }

    pub fn best(&self) -> Option<&ScoredCandidate> {
        self.trajectory
            .best
            .as_ref()
            .and_then(|m| self.store.get(&m.candidate_id))
    }

    fn survivor_views(&self) -> Vec<SurvivorView<'_>> {
        self.survivors
            .iter()
            .filter_map(|id| self.store.get(id))
            .map(|s| SurvivorView {
                candidate: &s.candidate,
                report: &s.report,
                fitness: s.fitness,
            })
            .collect()
    }
}

/// Asks the generator for up to `n` texts and records the exchange.
fn request_texts(
    state: &mut EvolutionState,
    generator: &mut dyn CandidateGenerator,
    prompt: &str,
    n: usize,
    generation: u32,
    config: &EngineConfig,
) -> Vec<String> {
    state.events.push(Event::Prompt {
        generation,
        bytes: prompt.len(),
        digest: digest(prompt),
    });
    state.texts_requested += n;
    let mut texts = generator.generate(&GenerationRequest {
        prompt,
        n,
        seed: derive_seed(config.rng_seed, generation, 1),
        generation,
    });
    texts.truncate(n);
    state.events.push(Event::Response {
        generation,
        requested: n,
        received: texts.len(),
        digests: texts.iter().map(|t| digest(t)).collect(),
    });
    texts
}

/// Turns texts into candidates, dropping any id already in the store or
/// earlier in the batch.
fn fresh_candidates(
    state: &mut EvolutionState,
    texts: Vec<String>,
    task: &TaskSpec,
    generation: u32,
    origin: Origin,
    parents: &[Candidate],
) -> Result<Vec<Candidate>, EvolutionError> {
    let parent_refs: Vec<&Candidate> = parents.iter().collect();
    let mut seen: HashSet<CandidateId> = HashSet::new();
    let mut out = Vec::new();
    for text in texts {
        let c = match origin {
            Origin::Seed => Candidate::seed(text, task.language_tag),
            _ => Candidate::derived(text, task.language_tag, generation, &parent_refs, origin)?,
        };
        if state.store.contains_key(&c.id) || !seen.insert(c.id.clone()) {
            state.events.push(Event::Duplicate {
                generation,
                candidate_id: c.id,
            });
            continue;
        }
        out.push(c);
    }
    Ok(out)
}

/// Generation-0 candidates. With a seed solution it comes first (origin
/// seed) and the generator fills the remaining slots from the bare problem
/// prompt; with population 1 the generator is not called at all.
pub fn initialize_population(
    state: &mut EvolutionState,
    task: &TaskSpec,
    generator: &mut dyn CandidateGenerator,
    config: &EngineConfig,
) -> Result<Vec<Candidate>, EvolutionError> {
    let mut population = Vec::new();
    if let Some(seed) = &task.seed_solution {
        population.extend(fresh_candidates(state, vec![seed.clone()], task, 0, Origin::Seed, &[])?);
    }
    let wanted = config.population_per_generation.saturating_sub(population.len());
    if wanted > 0 {
        let prompt = assemble_prompt(task, &[], &config.prompt_template, config.max_prompt_bytes);
        let texts = request_texts(state, generator, &prompt, wanted, 0, config);
        // generation-0 outputs have no parents, so they enter as roots
        let mut fresh = fresh_candidates(state, texts, task, 0, Origin::Seed, &[])?;
        for c in &mut fresh {
            c.origin = Origin::Generated;
        }
        fresh.retain(|c| population.iter().all(|p: &Candidate| p.id != c.id));
        population.extend(fresh);
    }
    if population.is_empty() {
        state.events.push(Event::Error {
            message: EvolutionError::EmptyGeneration.to_string(),
        });
        return Err(EvolutionError::EmptyGeneration);
    }
    Ok(population)
}

/// Evaluates, scores, archives and records one batch, then reselects
/// survivors from the previous survivors plus the batch.
fn absorb(
    state: &mut EvolutionState,
    batch: Vec<Candidate>,
    task: &TaskSpec,
    evaluator: &dyn Evaluator,
    config: &EngineConfig,
    generation: u32,
) -> Result<(), EvolutionError> {
    let table = config.token_table(task);
    let reports = par::map_bounded(&batch, config.jobs, |c| {
        let report = evaluator.evaluate(c, task, Stages::Full);
        let features = extract_features(&c.source, task.language_tag, &table, &config.bins);
        (report, features)
    });

    let mut pool: Vec<PopulationMember> = state
        .survivors
        .iter()
        .filter_map(|id| state.store.get(id))
        .map(ScoredCandidate::member)
        .collect();
    for (candidate, (report, features)) in batch.into_iter().zip(reports) {
        let fitness = compute_fitness(&report, config.epsilon_secs)?;
        let outcome = state.archive.insert(&candidate.id, fitness, generation, features);
        let summary = report.summary();
        state.events.push(Event::Report {
            generation,
            candidate_id: candidate.id.clone(),
            summary: summary.clone(),
            fitness: fitness.value(),
            elite: outcome == InsertOutcome::AcceptedAsElite,
        });
        state.trajectory.record(TrajectoryEntry {
            generation,
            candidate_id: candidate.id.clone(),
            origin: candidate.origin,
            parent_ids: candidate.parent_ids.clone(),
            report: summary,
            fitness: fitness.value(),
            source: candidate.source.clone(),
        });
        let scored = ScoredCandidate {
            candidate,
            report,
            fitness,
            features,
        };
        pool.push(scored.member());
        state.store.insert(scored.candidate.id.clone(), scored);
    }

    state.survivors = select_survivors(
        &pool,
        &state.archive,
        config.k,
        config.d,
        derive_seed(config.rng_seed, generation, 2),
    );
    state.events.push(Event::Selection {
        generation,
        survivors: state.survivors.clone(),
    });
    state.generation = generation;
    Ok(())
}

/// Runs generation 0 from the task's seed and/or the generator.
pub fn start(
    task: &TaskSpec,
    generator: &mut dyn CandidateGenerator,
    evaluator: &dyn Evaluator,
    config: &EngineConfig,
) -> Result<EvolutionState, EvolutionError> {
    config.validate()?;
    task.validate()?;
    let mut state = EvolutionState::new(config);
    let population = initialize_population(&mut state, task, generator, config)?;
    absorb(&mut state, population, task, evaluator, config, 0)?;
    Ok(state)
}

/// One full cycle: prompt, generate, dedup, evaluate, score, archive, select.
///
/// A generator that returns nothing, or only previously seen programs,
/// leaves archive, survivors and trajectory untouched; the generation is
/// still counted and the skip is logged.
pub fn run_generation(
    state: &mut EvolutionState,
    task: &TaskSpec,
    generator: &mut dyn CandidateGenerator,
    evaluator: &dyn Evaluator,
    config: &EngineConfig,
) -> Result<(), EvolutionError> {
    let generation = state.generation + 1;
    let prompt = assemble_prompt(
        task,
        &state.survivor_views(),
        &config.prompt_template,
        config.max_prompt_bytes,
    );
    let texts = request_texts(
        state,
        generator,
        &prompt,
        config.population_per_generation,
        generation,
        config,
    );
    if texts.is_empty() {
        state.events.push(Event::SkippedGeneration {
            generation,
            reason: "generator returned no programs".into(),
        });
        state.generation = generation;
        return Ok(());
    }
    let parents: Vec<Candidate> = state
        .survivors
        .iter()
        .filter_map(|id| state.store.get(id))
        .map(|s| s.candidate.clone())
        .collect();
    let batch = fresh_candidates(state, texts, task, generation, Origin::Generated, &parents)?;
    if batch.is_empty() {
        state.events.push(Event::SkippedGeneration {
            generation,
            reason: "every program was a duplicate".into(),
        });
        state.generation = generation;
        return Ok(());
    }
    absorb(state, batch, task, evaluator, config, generation)
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    /// Maximum-fitness candidate over the whole run; `None` when nothing
    /// ever scored above zero.
    pub best: Option<ScoredCandidate>,
    pub trajectory: Trajectory,
    pub archive: Archive,
    pub events: Vec<Event>,
    pub texts_requested: usize,
}

impl EvolutionResult {
    pub fn no_valid_solution(&self) -> bool {
        self.best.is_none()
    }

    pub fn iteration_speedup(&self) -> Result<f64, SpeedupError> {
        self.trajectory.iteration_speedup()
    }
}

/// Generation 0 followed by exactly `config.iterations` generations.
pub fn run_evolution(
    task: &TaskSpec,
    generator: &mut dyn CandidateGenerator,
    evaluator: &dyn Evaluator,
    config: &EngineConfig,
) -> Result<EvolutionResult, EvolutionError> {
    let mut state = start(task, generator, evaluator, config)?;
    for _ in 0..config.iterations {
        run_generation(&mut state, task, generator, evaluator, config)?;
    }
    Ok(EvolutionResult {
        best: state.best().cloned(),
        trajectory: state.trajectory,
        archive: state.archive,
        events: state.events,
        texts_requested: state.texts_requested,
    })
}

/// Speedup of the best solution over the first valid one.
pub fn iteration_speedup(trajectory: &Trajectory) -> Result<f64, SpeedupError> {
    trajectory.iteration_speedup()
}

#[cfg(test)]
mod tests;
