use crate::engine::{strip_code_fences, CandidateGenerator, GenerationRequest};
use crate::task::{TaskSpec, TestCase, TestSuite};

use super::MutationKind;

pub const PROBLEM_MARKER: &str = "=== PROBLEM ===";
pub const TESTS_MARKER: &str = "=== TESTS ===";
pub const SOLUTION_MARKER: &str = "=== SOLUTION ===";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MutationError {
    #[error("seed task {0} has no description")]
    NoDescription(String),
    #[error("seed task {0} has no test material")]
    NoTests(String),
    #[error("generator returned nothing")]
    NoResponse,
    #[error("unparseable mutation output: {0}")]
    Unparseable(String),
}

fn instruction(kind: MutationKind) -> &'static str {
    match kind {
        MutationKind::Type => {
            "Rewrite the problem so that it operates on a different element type \
             (for example strings or a small user-defined struct instead of integers). \
             Keep the algorithmic core the same."
        }
        MutationKind::Constraint => {
            "Rewrite the problem by adding a logical condition on which elements take part \
             (for example only odd values, or only elements above a threshold), so that a \
             solution must combine a filtering step with the original operation."
        }
        MutationKind::Algorithmic => {
            "Rewrite the problem into a structurally different computation over the same \
             data (for example turn a reduction into an inclusive prefix scan)."
        }
    }
}

fn prompt(seed: &TaskSpec, kind: MutationKind) -> String {
    let mut p = String::new();
    p.push_str("You write programming exercises for parallel code.\n");
    p.push_str(instruction(kind));
    p.push_str("\n\nOriginal problem:\n");
    p.push_str(seed.description.trim());
    p.push_str("\n\nOriginal tests:\n");
    p.push_str(&seed.tests.render());
    if let Some(sol) = &seed.seed_solution {
        p.push_str("\nReference solution:\n");
        p.push_str(sol.trim_end());
        p.push('\n');
    }
    p.push_str(&format!(
        "\nAnswer in exactly this layout:\n{PROBLEM_MARKER}\n<new problem statement>\n{TESTS_MARKER}\n\
         <either a complete test harness program, or cases written as\n# case <id>\n## input\n<stdin>\n## expected\n<stdout>>\n\
         {SOLUTION_MARKER}\n<optional reference solution>\n"
    ));
    p
}

fn parse_cases(text: &str) -> Option<Vec<TestCase>> {
    let mut cases = Vec::new();
    let mut blocks = text.split("# case ").skip(1).peekable();
    blocks.peek()?;
    for block in blocks {
        let (id, rest) = block.split_once('\n')?;
        let (_, rest) = rest.split_once("## input\n")?;
        let (input, expected) = rest.split_once("## expected\n")?;
        let mut input = input.trim_end().to_string();
        input.push('\n');
        let mut expected = expected.trim_end().to_string();
        expected.push('\n');
        cases.push(TestCase {
            id: id.trim().to_string(),
            input,
            expected,
        });
    }
    Some(cases)
}

/// Splits a generator response into (description, tests, optional solution).
pub fn parse_mutation(response: &str) -> Result<(String, TestSuite, Option<String>), MutationError> {
    let bad = |m: &str| MutationError::Unparseable(m.to_string());
    let (_, after) = response
        .split_once(PROBLEM_MARKER)
        .ok_or_else(|| bad("missing problem section"))?;
    let (problem, after) = after
        .split_once(TESTS_MARKER)
        .ok_or_else(|| bad("missing tests section"))?;
    let (tests, solution) = match after.split_once(SOLUTION_MARKER) {
        Some((t, s)) => (t, Some(strip_code_fences(s.trim()))),
        None => (after, None),
    };
    let problem = problem.trim().to_string();
    let tests = tests.trim();
    if problem.is_empty() {
        return Err(bad("empty problem section"));
    }
    if tests.is_empty() {
        return Err(bad("empty tests section"));
    }
    let suite = if tests.starts_with("# case ") {
        TestSuite {
            cases: parse_cases(tests).ok_or_else(|| bad("malformed test case block"))?,
            harness: None,
        }
    } else {
        TestSuite {
            cases: Vec::new(),
            harness: Some(strip_code_fences(tests)),
        }
    };
    Ok((problem, suite, solution.filter(|s| !s.trim().is_empty())))
}

/// Asks the generator for a mutated variant of `seed`. The new task keeps the
/// seed's toolchain and language, drops the sequential baseline, and records
/// the mutation in its lineage and id.
pub fn mutate_task(
    seed: &TaskSpec,
    kind: MutationKind,
    generator: &mut dyn CandidateGenerator,
    rng_seed: u64,
) -> Result<TaskSpec, MutationError> {
    if seed.description.trim().is_empty() {
        return Err(MutationError::NoDescription(seed.id.clone()));
    }
    if seed.tests.is_empty() {
        return Err(MutationError::NoTests(seed.id.clone()));
    }
    let prompt = prompt(seed, kind);
    let response = generator
        .generate(&GenerationRequest {
            prompt: &prompt,
            n: 1,
            seed: rng_seed,
            generation: 0,
        })
        .into_iter()
        .next()
        .ok_or(MutationError::NoResponse)?;
    let (description, tests, solution) = parse_mutation(&response).map_err(|e| {
        log::warn!("mutation of {} ({:?}) rejected: {e}", seed.id, kind);
        e
    })?;
    let mut lineage = seed.lineage.clone();
    lineage.push(kind);
    Ok(TaskSpec {
        id: format!("{}+{}", seed.id, kind.suffix()),
        description,
        tests,
        toolchain: seed.toolchain.clone(),
        seed_solution: solution,
        sequential_baseline: None,
        time_limit: seed.time_limit,
        language_tag: seed.language_tag,
        timing_case: None,
        lineage,
    })
}

/// Seed id of a mutated task: its id with one suffix stripped per lineage entry.
pub(crate) fn root_id(task: &TaskSpec) -> String {
    let mut id = task.id.as_str();
    for _ in &task.lineage {
        match id.rsplit_once('+') {
            Some((head, _)) => id = head,
            None => break,
        }
    }
    id.to_string()
}
