use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Trajectory, TrajectoryEntry};
use crate::task::{normalize_and_hash, LanguageTag};

pub const DEFAULT_PAIR_THRESHOLD: f64 = 1.2;

pub const COMPARISON_INSTRUCTION: &str = "Determine which of the two code solutions has better performance.";

/// A slower and a faster valid solution to the same task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfPair {
    pub task_id: String,
    pub base_id: String,
    pub opt_id: String,
    pub base_code: String,
    pub opt_code: String,
    pub base_time_secs: f64,
    pub opt_time_secs: f64,
    pub speedup: f64,
}

impl PerfPair {
    pub fn validate(&self, threshold: f64) -> Result<(), String> {
        if !(self.base_time_secs > 0.0 && self.opt_time_secs > 0.0) {
            return Err(format!("pair {}→{}: times must be positive", self.base_id, self.opt_id));
        }
        if self.speedup < threshold {
            return Err(format!(
                "pair {}→{}: speedup {} below {threshold}",
                self.base_id, self.opt_id, self.speedup
            ));
        }
        Ok(())
    }
}

fn timed(e: &TrajectoryEntry) -> Option<f64> {
    e.report.runtime_secs.filter(|_| e.is_valid())
}

/// Every (earlier, later) pair of valid trajectory entries whose runtime
/// ratio reaches `threshold`. Pairs whose sources normalize to the same
/// program are skipped, as are repeated (base, opt) id pairs.
pub fn extract_perf_pairs(task_id: &str, trajectory: &Trajectory, threshold: f64, lang: LanguageTag) -> Vec<PerfPair> {
    let valid: Vec<(&TrajectoryEntry, f64)> = trajectory.entries().filter_map(|e| timed(e).map(|t| (e, t))).collect();
    let hashes: Vec<_> = valid.iter().map(|(e, _)| normalize_and_hash(&e.source, lang)).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for i in 0..valid.len() {
        for j in i + 1..valid.len() {
            let ((base, bt), (opt, ot)) = (valid[i], valid[j]);
            if hashes[i] == hashes[j] {
                continue;
            }
            let speedup = bt / ot;
            if speedup < threshold {
                continue;
            }
            if !seen.insert((base.candidate_id.clone(), opt.candidate_id.clone())) {
                continue;
            }
            out.push(PerfPair {
                task_id: task_id.to_string(),
                base_id: base.candidate_id.to_string(),
                opt_id: opt.candidate_id.to_string(),
                base_code: base.source.clone(),
                opt_code: opt.source.clone(),
                base_time_secs: bt,
                opt_time_secs: ot,
                speedup,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    A,
    B,
}

/// Pairwise "which is faster" example. The measured times travel with the
/// record so the label can be audited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonExample {
    pub instruction: String,
    pub code_a: String,
    pub code_b: String,
    pub label: Label,
    pub time_a_secs: f64,
    pub time_b_secs: f64,
    pub task_id: String,
}

impl ComparisonExample {
    pub fn validate(&self) -> Result<(), String> {
        let ok = match self.label {
            Label::A => self.time_a_secs < self.time_b_secs,
            Label::B => self.time_b_secs < self.time_a_secs,
        };
        if ok {
            Ok(())
        } else {
            Err(format!(
                "label {:?} does not point at the faster code ({} vs {})",
                self.label, self.time_a_secs, self.time_b_secs
            ))
        }
    }
}

/// Coin for pair `index`: a ChaCha8 stream per record, so each example's
/// placement depends only on the seed and its position.
fn coin(seed: u64, index: usize) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.gen::<bool>()
}

/// One example per pair with the faster code placed at A or B by a seeded
/// fair coin. Pairs with equal times are skipped.
pub fn build_comparison_examples(pairs: &[PerfPair], seed: u64) -> Vec<ComparisonExample> {
    let mut out = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        if p.base_time_secs == p.opt_time_secs {
            log::warn!("skipping tied pair {}→{} ({}s)", p.base_id, p.opt_id, p.opt_time_secs);
            continue;
        }
        let (fast, fast_t, slow, slow_t) = if p.opt_time_secs < p.base_time_secs {
            (&p.opt_code, p.opt_time_secs, &p.base_code, p.base_time_secs)
        } else {
            (&p.base_code, p.base_time_secs, &p.opt_code, p.opt_time_secs)
        };
        let heads = coin(seed, i);
        let (code_a, time_a, code_b, time_b, label) = if heads {
            (fast, fast_t, slow, slow_t, Label::A)
        } else {
            (slow, slow_t, fast, fast_t, Label::B)
        };
        out.push(ComparisonExample {
            instruction: COMPARISON_INSTRUCTION.to_string(),
            code_a: code_a.clone(),
            code_b: code_b.clone(),
            label,
            time_a_secs: time_a,
            time_b_secs: time_b,
            task_id: p.task_id.clone(),
        });
    }
    out
}
