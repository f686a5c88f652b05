//! Prompt assembly: problem statement plus one block per survivor.

use crate::archive::rank;
use crate::fitness::FitnessScore;
use crate::report::EvaluationReport;
use crate::task::{Candidate, TaskSpec};

pub const PROBLEM_PLACEHOLDER: &str = "{problem_description}";
pub const SURVIVORS_PLACEHOLDER: &str = "{survivor_blocks}";

/// System prompt for C++/ParlayLib tasks. With no survivors the
/// `{survivor_blocks}` slot renders empty.
pub const DEFAULT_TEMPLATE: &str = "\
You are an expert C++ competitive programmer. Your task is to write a
COMPLETE, CORRECT, and FAST C++ solution.

PROBLEM:
{problem_description}

REQUIREMENTS:
Write a complete C++ parallel program that compiles and runs correctly
Read input from standard input (cin)
Write output to standard output (cout)
Handle all edge cases mentioned in the problem
Optimize for speed - use efficient algorithms and data structures
Use C++ STL where appropriate (vector, map, set, priority_queue, etc.)
Consider time complexity and space complexity
The parlay library MUST be used as the core computation of the program

AVAILABLE LIBRARIES:
Standard C++ libraries (iostream, algorithm, vector, map, etc.)
The parlay library

Note:
parlay::parallel_for does not guarantee ordering, do not use it with IO operations.

CODE STYLE:
Use C++ style comments: // for single line, /* */ for multi-line
Do NOT use Python-style # comments
Comments should be simple and short
Include necessary headers
Write clean, readable code

OUTPUT FORMAT:
Return ONLY the complete C++ code. Do not include explanations,
markdown formatting, or code blocks.
Just the raw C++ source code that can be directly compiled.
{survivor_blocks}";

pub fn validate_template(template: &str) -> Result<(), String> {
    for ph in [PROBLEM_PLACEHOLDER, SURVIVORS_PLACEHOLDER] {
        if !template.contains(ph) {
            return Err(format!("prompt template is missing the {ph} placeholder"));
        }
    }
    Ok(())
}

pub struct SurvivorView<'a> {
    pub candidate: &'a Candidate,
    pub report: &'a EvaluationReport,
    pub fitness: FitnessScore,
}

struct Block {
    generation: u32,
    header: String,
    diagnostics: String,
    source: String,
}

impl Block {
    fn render(&self) -> String {
        let mut s = self.header.clone();
        if !self.diagnostics.is_empty() {
            s.push_str("Diagnostics:\n");
            s.push_str(&self.diagnostics);
            if !self.diagnostics.ends_with('\n') {
                s.push('\n');
            }
        }
        s.push_str("Source:\n");
        s.push_str(&self.source);
        if !self.source.ends_with('\n') {
            s.push('\n');
        }
        s.push('\n');
        s
    }
}

fn make_block(index: usize, v: &SurvivorView<'_>) -> Block {
    let summary = v.report.summary();
    let mut header = format!(
        "### Candidate {} (id {}, generation {})\nFitness: {}\n",
        index + 1,
        v.candidate.id.short(),
        v.candidate.generation,
        v.fitness
    );
    if let Some(t) = summary.runtime_secs {
        header.push_str(&format!("Runtime: {t:.6} s\n"));
    }
    header.push_str(&format!(
        "Status: build={} tests={} race={}\n",
        summary.build, summary.tests, summary.race
    ));
    let diagnostics = v
        .report
        .diagnostics
        .iter()
        .map(|d| d.text.trim_end())
        .collect::<Vec<_>>()
        .join("\n---\n");
    Block {
        generation: v.candidate.generation,
        header,
        diagnostics,
        source: v.candidate.source.clone(),
    }
}

fn render(template: &str, description: &str, blocks: &[Block]) -> String {
    let section = if blocks.is_empty() {
        String::new()
    } else {
        let mut s = String::from("\nPREVIOUS CANDIDATES (best first). Improve on them:\n\n");
        for b in blocks {
            s.push_str(&b.render());
        }
        s
    };
    template
        .replace(PROBLEM_PLACEHOLDER, description.trim_end())
        .replace(SURVIVORS_PLACEHOLDER, &section)
}

fn truncate_to(text: &mut String, max: usize) {
    if text.len() > max {
        let mut end = max;
        while !text.is_char_boundary(end) {
            end -= 1;
        }
        text.truncate(end);
    }
}

/// Renders the template. Blocks are ordered best first; when the result
/// exceeds `max_bytes`, diagnostics are dropped oldest generation first,
/// then whole blocks from the tail, and finally the text is cut.
pub fn assemble_prompt(task: &TaskSpec, survivors: &[SurvivorView<'_>], template: &str, max_bytes: usize) -> String {
    let mut order: Vec<&SurvivorView<'_>> = survivors.iter().collect();
    order.sort_by(|a, b| {
        rank(
            (a.fitness, a.candidate.generation, &a.candidate.id),
            (b.fitness, b.candidate.generation, &b.candidate.id),
        )
    });
    let mut blocks: Vec<Block> = order.iter().enumerate().map(|(i, v)| make_block(i, v)).collect();

    let mut prompt = render(template, &task.description, &blocks);
    if prompt.len() <= max_bytes {
        return prompt;
    }

    // oldest first; among equals, the lowest-ranked block loses its diagnostics first
    let mut by_age: Vec<usize> = (0..blocks.len()).collect();
    by_age.sort_by(|&a, &b| blocks[a].generation.cmp(&blocks[b].generation).then(b.cmp(&a)));
    for i in by_age {
        if blocks[i].diagnostics.is_empty() {
            continue;
        }
        blocks[i].diagnostics.clear();
        prompt = render(template, &task.description, &blocks);
        if prompt.len() <= max_bytes {
            return prompt;
        }
    }
    while blocks.len() > 1 {
        blocks.pop();
        prompt = render(template, &task.description, &blocks);
        if prompt.len() <= max_bytes {
            return prompt;
        }
    }
    truncate_to(&mut prompt, max_bytes);
    prompt
}
