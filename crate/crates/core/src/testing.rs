//! Small task and source builders shared by unit tests, integration tests
//! and benches.

use std::time::Duration;

use crate::task::{LanguageTag, TaskSpec, TestCase, TestSuite, ToolchainPolicy};

/// C++ task: echo one integer. Uses the stock g++ toolchain with a short
/// time limit and a single timing repetition.
pub fn echo_task() -> TaskSpec {
    let mut toolchain = ToolchainPolicy::gxx();
    toolchain.thread_count = 4;
    toolchain.repetitions = 1;
    toolchain.compile_timeout_secs = 60.0;
    toolchain.run_timeout_secs = 5.0;
    toolchain.sanitizer_time_factor = 2.0;
    TaskSpec {
        id: "echo".into(),
        description: "Read one integer from standard input and print it.".into(),
        tests: TestSuite {
            cases: vec![TestCase {
                id: "01".into(),
                input: "5\n".into(),
                expected: "5\n".into(),
            }],
            harness: None,
        },
        toolchain,
        seed_solution: None,
        sequential_baseline: None,
        time_limit: Duration::from_secs(2),
        language_tag: LanguageTag::CxxParlay,
        timing_case: None,
        lineage: Vec::new(),
    }
}

/// Same task with a seed solution, for stubbed runs.
pub fn stub_task(seed: Option<String>) -> TaskSpec {
    TaskSpec {
        id: "stub".into(),
        seed_solution: seed,
        ..echo_task()
    }
}

/// Stub-evaluated source that passes with the given runtime. `tag` keeps
/// otherwise identical programs distinct.
pub fn stub_source(runtime_secs: f64, tag: &str) -> String {
    format!("#pragma stub runtime={runtime_secs:e}\nint variant_{tag} = 0;\nint main() {{ return 0; }}\n")
}

/// Stub-evaluated source with an extra directive such as `build=fail`.
pub fn stub_failing(directive: &str, tag: &str) -> String {
    format!("#pragma stub {directive}\nint variant_{tag} = 0;\nint main() {{ return 0; }}\n")
}
