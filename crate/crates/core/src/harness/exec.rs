//! Subprocess execution with a wall-clock limit and bounded output capture.

use std::io::{self, Read, Write};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error("command not found: {0}")]
    NotFound(String),
    #[error("empty argument vector")]
    EmptyCommand,
    #[error("failed to run {program}: {source}")]
    Io {
        program: String,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Code(i32),
    Signal(i32),
    /// Killed by the harness after the timeout.
    Killed,
}

#[derive(Debug, Clone)]
pub struct ExecutionResult {
    pub exit: ExitKind,
    pub stdout: String,
    pub stderr: String,
    pub wall_time: Duration,
    pub timed_out: bool,
}

impl ExecutionResult {
    pub fn success(&self) -> bool {
        self.exit == ExitKind::Code(0) && !self.timed_out
    }

    pub fn describe_exit(&self) -> String {
        match self.exit {
            ExitKind::Code(c) => format!("exit code {c}"),
            ExitKind::Signal(s) => format!("killed by signal {s}"),
            ExitKind::Killed => format!("timed out after {:.3}s", self.wall_time.as_secs_f64()),
        }
    }
}

pub struct ExecRequest<'a> {
    pub argv: &'a [String],
    pub stdin: &'a [u8],
    pub env: &'a [(String, String)],
    pub cwd: &'a Path,
    pub timeout: Duration,
    /// Bytes kept per stream; the rest is drained and dropped.
    pub capture_cap: usize,
}

/// Runs the command in its own process group so a timeout can kill any
/// children it spawned.
pub fn execute(req: &ExecRequest<'_>) -> Result<ExecutionResult, ExecError> {
    let (program, args) = req.argv.split_first().ok_or(ExecError::EmptyCommand)?;
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(req.cwd)
        .envs(req.env.iter().map(|(k, v)| (k, v)))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0);

    let start = Instant::now();
    let mut child = cmd.spawn().map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => ExecError::NotFound(program.clone()),
        _ => ExecError::Io {
            program: program.clone(),
            source,
        },
    })?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = req.stdin.to_vec();
    let writer = thread::spawn(move || {
        // the child may exit without reading its input
        let _ = stdin.write_all(&input);
    });
    let cap = req.capture_cap;
    let stdout = child.stdout.take().expect("piped stdout");
    let stderr = child.stderr.take().expect("piped stderr");
    let out_reader = thread::spawn(move || read_capped(stdout, cap));
    let err_reader = thread::spawn(move || read_capped(stderr, cap));

    let io_err = |source| ExecError::Io {
        program: program.clone(),
        source,
    };
    let (status, timed_out) = match child.wait_timeout(req.timeout).map_err(io_err)? {
        Some(status) => (Some(status), false),
        None => {
            kill_group(child.id());
            let _ = child.kill();
            child.wait().map_err(io_err)?;
            (None, true)
        }
    };
    let mut wall_time = start.elapsed();
    if timed_out {
        wall_time = wall_time.max(req.timeout);
    }

    let _ = writer.join();
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();

    let exit = match status {
        None => ExitKind::Killed,
        Some(s) => match (s.code(), s.signal()) {
            (Some(c), _) => ExitKind::Code(c),
            (None, Some(sig)) => ExitKind::Signal(sig),
            (None, None) => ExitKind::Code(-1),
        },
    };
    Ok(ExecutionResult {
        exit,
        stdout,
        stderr,
        wall_time,
        timed_out,
    })
}

fn kill_group(pid: u32) {
    // SAFETY: plain syscall on a process group we created; errors are ignored
    // because the group may already be gone.
    unsafe {
        libc::killpg(pid as libc::pid_t, libc::SIGKILL);
    }
}

fn read_capped(mut stream: impl Read, cap: usize) -> String {
    let mut kept = Vec::new();
    let mut buf = [0u8; 8192];
    loop {
        match stream.read(&mut buf) {
            Ok(0) | Err(_) => break,
            Ok(n) => {
                let room = cap.saturating_sub(kept.len());
                kept.extend_from_slice(&buf[..n.min(room)]);
            }
        }
    }
    let mut text = String::from_utf8_lossy(&kept).into_owned();
    // lossy decoding can grow a cut multi-byte sequence past the cap
    while text.len() > cap {
        text.pop();
    }
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh(script: &str) -> Vec<String> {
        vec!["sh".into(), "-c".into(), script.into()]
    }

    fn run(argv: &[String], stdin: &str, timeout: Duration, cap: usize) -> Result<ExecutionResult, ExecError> {
        execute(&ExecRequest {
            argv,
            stdin: stdin.as_bytes(),
            env: &[("EVO_TEST_VAR".into(), "42".into())],
            cwd: Path::new("."),
            timeout,
            capture_cap: cap,
        })
    }

    #[test]
    fn captures_stdout_and_exit_code() {
        let r = run(
            &sh("cat; echo $EVO_TEST_VAR; exit 3"),
            "hi\n",
            Duration::from_secs(5),
            1 << 20,
        )
        .unwrap();
        assert_eq!(r.stdout, "hi\n42\n");
        assert_eq!(r.exit, ExitKind::Code(3));
        assert!(!r.timed_out);
    }

    #[test]
    fn timeout_kills_and_reports_at_least_the_limit() {
        let limit = Duration::from_millis(300);
        let r = run(&sh("sleep 30"), "", limit, 1024).unwrap();
        assert!(r.timed_out);
        assert_eq!(r.exit, ExitKind::Killed);
        assert!(r.wall_time >= limit);
        assert!(r.wall_time < Duration::from_secs(10));
    }

    #[test]
    fn output_is_truncated_to_cap() {
        let r = run(&sh("yes | head -c 100000"), "", Duration::from_secs(5), 1000).unwrap();
        assert_eq!(r.stdout.len(), 1000);
    }

    #[test]
    fn missing_program_is_distinguished() {
        let argv = vec!["definitely-not-a-real-compiler-xyz".to_string()];
        assert!(matches!(
            run(&argv, "", Duration::from_secs(1), 10),
            Err(ExecError::NotFound(_))
        ));
    }

    #[test]
    fn signals_are_reported() {
        let r = run(&sh("kill -SEGV $$"), "", Duration::from_secs(5), 10).unwrap();
        assert_eq!(r.exit, ExitKind::Signal(libc::SIGSEGV));
    }
}
