//! Evolutionary search for fast, race-free parallel programs, plus the
//! corpus and benchmark tooling built around it.
//!
//! The pieces, bottom up: [`task`] (problems and candidates), [`harness`]
//! (compile, test, race-check and time a candidate), [`fitness`],
//! [`features`] and [`archive`] (quality-diversity bookkeeping), [`engine`]
//! (the generational loop), [`corpus`] (training-data synthesis) and
//! [`metrics`] (benchmark statistics).

pub mod archive;
pub mod corpus;
pub mod engine;
pub mod features;
pub mod fitness;
pub mod harness;
pub mod lexer;
pub mod metrics;
pub mod par;
pub mod report;
pub mod task;
#[doc(hidden)]
pub mod testing;

pub use archive::{select_survivors, Archive, Elite, InsertOutcome};
pub use engine::{run_evolution, EngineConfig, EvolutionError, EvolutionResult};
pub use features::{extract_features, BinConfig, FeatureDescriptor};
pub use fitness::{compute_fitness, FitnessScore};
pub use harness::{Evaluator, Stages, StubEvaluator, SubprocessEvaluator};
pub use report::EvaluationReport;
pub use task::{Candidate, CandidateId, LanguageTag, TaskSpec};
