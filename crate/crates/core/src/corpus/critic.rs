use serde::{Deserialize, Serialize};

use crate::harness::{Evaluator, Stages};
use crate::par;
use crate::report::{BuildOutcome, EvaluationReport, RaceOutcome, TestOutcome};
use crate::task::{Candidate, TaskSpec};

use super::mutate::root_id;
use super::MutationKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed_id: String,
    pub mutation_chain: Vec<MutationKind>,
    pub generator_id: String,
}

/// A (problem, code) pair that built and passed its tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstructionRecord {
    pub instruction: String,
    pub target_code: String,
    pub unit_test: String,
    pub provenance: Provenance,
    pub verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectStage {
    Build,
    Tests,
    Race,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CriticVerdict {
    Accepted(InstructionRecord),
    Rejected {
        stage: RejectStage,
        detail: String,
    },
    /// Infrastructure kept failing; neither accepted nor rejected.
    Infra {
        message: String,
    },
}

impl CriticVerdict {
    pub fn record(&self) -> Option<&InstructionRecord> {
        match self {
            CriticVerdict::Accepted(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CriticConfig {
    /// Re-evaluations after an infrastructure error.
    pub infra_retries: u32,
    /// Also run the race stage and reject racy code.
    pub race_check: bool,
    pub jobs: usize,
}

impl Default for CriticConfig {
    fn default() -> Self {
        CriticConfig {
            infra_retries: 2,
            race_check: false,
            jobs: 0,
        }
    }
}

fn verdict(report: &EvaluationReport, problem: &TaskSpec, code: &str, generator_id: &str) -> CriticVerdict {
    if let BuildOutcome::Failed { log, .. } = &report.build {
        return CriticVerdict::Rejected {
            stage: RejectStage::Build,
            detail: log.clone(),
        };
    }
    match &report.tests {
        TestOutcome::Passed => {}
        TestOutcome::Failed { case_id, detail } => {
            return CriticVerdict::Rejected {
                stage: RejectStage::Tests,
                detail: format!("case {case_id}: {detail}"),
            }
        }
        TestOutcome::TimedOut { case_id } => {
            return CriticVerdict::Rejected {
                stage: RejectStage::Tests,
                detail: format!("case {case_id}: timed out"),
            }
        }
        TestOutcome::Skipped => {
            return CriticVerdict::Rejected {
                stage: RejectStage::Tests,
                detail: "tests did not run".into(),
            }
        }
    }
    if matches!(
        report.race,
        RaceOutcome::RaceDetected { .. } | RaceOutcome::DeadlockSuspected { .. }
    ) {
        return CriticVerdict::Rejected {
            stage: RejectStage::Race,
            detail: report.summary().race,
        };
    }
    CriticVerdict::Accepted(InstructionRecord {
        instruction: problem.description.clone(),
        target_code: code.to_string(),
        unit_test: problem.tests.render(),
        provenance: Provenance {
            seed_id: root_id(problem),
            mutation_chain: problem.lineage.clone(),
            generator_id: generator_id.to_string(),
        },
        verified: true,
    })
}

/// Accepts `code` for `problem` iff it builds and passes the tests.
pub fn critic_accept(
    problem: &TaskSpec,
    code: &str,
    evaluator: &dyn Evaluator,
    generator_id: &str,
    config: &CriticConfig,
) -> CriticVerdict {
    let candidate = Candidate::seed(code, problem.language_tag);
    let stages = if config.race_check {
        Stages::RaceCheck
    } else {
        Stages::Correctness
    };
    let mut attempts = 0;
    loop {
        let report = evaluator.evaluate(&candidate, problem, stages);
        match &report.infra_error {
            Some(msg) if attempts < config.infra_retries => {
                attempts += 1;
                log::warn!("critic: infra error on {} (attempt {attempts}): {msg}", problem.id);
            }
            Some(msg) => return CriticVerdict::Infra { message: msg.clone() },
            None => return verdict(&report, problem, code, generator_id),
        }
    }
}

/// Runs the critic over many pairs concurrently; verdicts keep input order.
pub fn critic_batch(
    pairs: &[(TaskSpec, String)],
    evaluator: &dyn Evaluator,
    generator_id: &str,
    config: &CriticConfig,
) -> Vec<CriticVerdict> {
    par::map_bounded(pairs, config.jobs, |(task, code)| {
        critic_accept(task, code, evaluator, generator_id, config)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::StubEvaluator;
    use crate::testing::{echo_task, stub_failing, stub_source};

    #[test]
    fn passing_code_is_verified() {
        let v = critic_accept(
            &echo_task(),
            &stub_source(1.0, "ok"),
            &StubEvaluator::default(),
            "g",
            &Default::default(),
        );
        let r = v.record().unwrap();
        assert!(r.verified);
        assert_eq!(r.provenance.seed_id, "echo");
        assert!(r.unit_test.contains("## expected"));
    }

    #[test]
    fn rejections_name_the_stage() {
        let e = StubEvaluator::default();
        let cfg = CriticConfig::default();
        let build = critic_accept(&echo_task(), &stub_failing("build=fail nope", "b"), &e, "g", &cfg);
        assert!(matches!(
            build,
            CriticVerdict::Rejected {
                stage: RejectStage::Build,
                ..
            }
        ));
        let tests = critic_accept(&echo_task(), &stub_failing("tests=fail wrong", "t"), &e, "g", &cfg);
        assert!(matches!(
            tests,
            CriticVerdict::Rejected {
                stage: RejectStage::Tests,
                ..
            }
        ));
    }

    #[test]
    fn races_only_matter_when_checked() {
        let e = StubEvaluator::default();
        let src = format!("#pragma stub race=detected\n{}", stub_source(1.0, "r"));
        let lax = critic_accept(&echo_task(), &src, &e, "g", &CriticConfig::default());
        assert!(lax.record().is_some());
        let strict = CriticConfig {
            race_check: true,
            ..Default::default()
        };
        let v = critic_accept(&echo_task(), &src, &e, "g", &strict);
        assert!(matches!(
            v,
            CriticVerdict::Rejected {
                stage: RejectStage::Race,
                ..
            }
        ));
    }

    #[test]
    fn infra_is_neither_accept_nor_reject() {
        let v = critic_accept(
            &echo_task(),
            &stub_failing("infra=eacces permission denied", "i"),
            &StubEvaluator::default(),
            "g",
            &Default::default(),
        );
        assert_eq!(
            v,
            CriticVerdict::Infra {
                message: "permission denied".into()
            }
        );
    }

    #[test]
    fn batch_preserves_order() {
        let pairs: Vec<(TaskSpec, String)> = (0..6)
            .map(|i| {
                let code = if i % 2 == 0 {
                    stub_source(1.0, &i.to_string())
                } else {
                    stub_failing("build=fail x", &i.to_string())
                };
                (echo_task(), code)
            })
            .collect();
        let v = critic_batch(&pairs, &StubEvaluator::default(), "g", &Default::default());
        let accepted: Vec<bool> = v.iter().map(|v| v.record().is_some()).collect();
        assert_eq!(accepted, vec![true, false, true, false, true, false]);
    }
}
