//! Sources of new candidate programs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub struct GenerationRequest<'a> {
    pub prompt: &'a str,
    /// Upper bound on texts to return.
    pub n: usize,
    pub seed: u64,
    pub generation: u32,
}

/// Produces candidate source texts from a prompt. Implementations must be
/// total: on provider failure they return fewer texts (possibly none)
/// rather than an error.
pub trait CandidateGenerator: Send {
    fn id(&self) -> String;
    fn generate(&mut self, request: &GenerationRequest<'_>) -> Vec<String>;
}

impl<G: CandidateGenerator + ?Sized> CandidateGenerator for Box<G> {
    fn id(&self) -> String {
        (**self).id()
    }
    fn generate(&mut self, request: &GenerationRequest<'_>) -> Vec<String> {
        (**self).generate(request)
    }
}

/// Closure-backed generator for tests and scripted scenarios.
pub struct FnGenerator<F> {
    name: String,
    f: F,
}

impl<F> FnGenerator<F>
where
    F: FnMut(&GenerationRequest<'_>) -> Vec<String> + Send,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnGenerator { name: name.into(), f }
    }
}

impl<F> CandidateGenerator for FnGenerator<F>
where
    F: FnMut(&GenerationRequest<'_>) -> Vec<String> + Send,
{
    fn id(&self) -> String {
        self.name.clone()
    }

    fn generate(&mut self, request: &GenerationRequest<'_>) -> Vec<String> {
        let mut out = (self.f)(request);
        out.truncate(request.n);
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PlaylistError {
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaylistFile {
    #[serde(default)]
    generation: Vec<PlaylistEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlaylistEntry {
    index: u32,
    sources: Vec<PathBuf>,
}

/// Replays source files per generation index from a TOML playlist:
///
/// ```toml
/// [[generation]]
/// index = 1
/// sources = ["faster.cpp", "racy.cpp"]
/// ```
///
/// Paths are relative to the playlist file. Generations without an entry
/// yield nothing. Every prompt received is kept for inspection.
#[derive(Debug, Clone)]
pub struct PlaylistGenerator {
    name: String,
    entries: Vec<(u32, Vec<String>)>,
    pub prompts: Vec<String>,
}

impl PlaylistGenerator {
    pub fn load(path: &Path) -> Result<Self, PlaylistError> {
        let err = |message: String| PlaylistError::Read {
            path: path.to_path_buf(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let file: PlaylistFile = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut entries = Vec::new();
        for e in file.generation {
            let sources = e
                .sources
                .iter()
                .map(|p| {
                    let full = base.join(p);
                    fs::read_to_string(&full).map_err(|io| err(format!("{}: {io}", full.display())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            entries.push((e.index, sources));
        }
        Ok(PlaylistGenerator {
            name: format!("mock:{}", path.display()),
            entries,
            prompts: Vec::new(),
        })
    }

    pub fn from_entries(entries: Vec<(u32, Vec<String>)>) -> Self {
        PlaylistGenerator {
            name: "mock:inline".into(),
            entries,
            prompts: Vec::new(),
        }
    }
}

impl CandidateGenerator for PlaylistGenerator {
    fn id(&self) -> String {
        self.name.clone()
    }

    fn generate(&mut self, request: &GenerationRequest<'_>) -> Vec<String> {
        self.prompts.push(request.prompt.to_string());
        self.entries
            .iter()
            .filter(|(g, _)| *g == request.generation)
            .flat_map(|(_, s)| s.iter().cloned())
            .take(request.n)
            .collect()
    }
}

/// Connection settings for an OpenAI-compatible chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    pub base_url: String,
    #[serde(default = "default_model")]
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default = "default_token_env")]
    pub auth_token_env: String,
    #[serde(default = "default_request_timeout")]
    pub request_timeout_secs: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

fn default_model() -> String {
    "default".into()
}
fn default_token_env() -> String {
    "EVOFORGE_API_TOKEN".into()
}
fn default_request_timeout() -> f64 {
    300.0
}
fn default_temperature() -> f64 {
    0.7
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model: default_model(),
            auth_token_env: default_token_env(),
            request_timeout_secs: default_request_timeout(),
            temperature: default_temperature(),
        }
    }
}

/// Thin HTTP adapter. One request per requested text; failed requests are
/// logged and skipped.
pub struct EndpointGenerator {
    config: EndpointConfig,
    agent: ureq::Agent,
}

impl EndpointGenerator {
    pub fn new(config: EndpointConfig) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs_f64(config.request_timeout_secs.max(0.001)))
            .build();
        EndpointGenerator { config, agent }
    }

    fn request_one(&self, prompt: &str, seed: u64) -> Result<String, String> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let body = serde_json::json!({
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
            "seed": seed,
        });
        let mut req = self.agent.post(&url);
        if let Ok(token) = std::env::var(&self.config.auth_token_env) {
            req = req.set("Authorization", &format!("Bearer {token}"));
        }
        let resp: serde_json::Value = req
            .send_json(body)
            .map_err(|e| e.to_string())?
            .into_json()
            .map_err(|e| e.to_string())?;
        resp["choices"][0]["message"]["content"]
            .as_str()
            .map(strip_code_fences)
            .ok_or_else(|| "response has no choices[0].message.content".to_string())
    }
}

impl CandidateGenerator for EndpointGenerator {
    fn id(&self) -> String {
        format!("endpoint:{}#{}", self.config.base_url, self.config.model)
    }

    fn generate(&mut self, request: &GenerationRequest<'_>) -> Vec<String> {
        (0..request.n as u64)
            .filter_map(
                |i| match self.request_one(request.prompt, request.seed.wrapping_add(i)) {
                    Ok(text) => Some(text),
                    Err(e) => {
                        log::warn!("generator request failed: {e}");
                        None
                    }
                },
            )
            .collect()
    }
}

/// Models often wrap code in markdown fences despite being told not to.
pub fn strip_code_fences(text: &str) -> String {
    let trimmed = text.trim();
    if let Some(rest) = trimmed.strip_prefix("```") {
        let body = rest.split_once('\n').map(|(_, b)| b).unwrap_or("");
        let body = body.trim_end();
        let body = body.strip_suffix("```").unwrap_or(body);
        return format!("{}\n", body.trim_end());
    }
    text.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    #[test]
    fn fences_are_removed() {
        assert_eq!(strip_code_fences("```cpp\nint main(){}\n```"), "int main(){}\n");
        assert_eq!(strip_code_fences("int x;"), "int x;");
    }

    #[test]
    fn playlist_replays_by_generation() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.cpp"), "A").unwrap();
        fs::write(dir.path().join("b.cpp"), "B").unwrap();
        let pl = dir.path().join("playlist.toml");
        fs::write(&pl, "[[generation]]\nindex = 1\nsources = [\"a.cpp\", \"b.cpp\"]\n").unwrap();
        let mut g = PlaylistGenerator::load(&pl).unwrap();
        let req = |generation, n| GenerationRequest {
            prompt: "p",
            n,
            seed: 0,
            generation,
        };
        assert!(g.generate(&req(0, 4)).is_empty());
        assert_eq!(g.generate(&req(1, 4)), vec!["A", "B"]);
        assert_eq!(g.generate(&req(1, 1)), vec!["A"]);
        assert_eq!(g.prompts.len(), 3);
    }

    #[test]
    fn playlist_with_missing_file_fails_to_load() {
        let dir = tempfile::tempdir().unwrap();
        let pl = dir.path().join("playlist.toml");
        fs::write(&pl, "[[generation]]\nindex = 0\nsources = [\"nope.cpp\"]\n").unwrap();
        assert!(PlaylistGenerator::load(&pl).is_err());
    }

    fn serve_once(listener: TcpListener, status: &'static str, body: String) -> std::thread::JoinHandle<String> {
        std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            let mut head = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                head.push_str(&line);
            }
            let mut req_body = vec![0u8; len];
            reader.read_exact(&mut req_body).unwrap();
            write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            format!("{head}\n{}", String::from_utf8_lossy(&req_body))
        })
    }

    #[test]
    fn endpoint_posts_chat_completion_and_extracts_content() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let body = serde_json::json!({"choices": [{"message": {"content": "```cpp\nint main(){}\n```"}}]}).to_string();
        let server = serve_once(listener, "200 OK", body);
        let mut g = EndpointGenerator::new(EndpointConfig::new(format!("http://{addr}/v1")));
        let out = g.generate(&GenerationRequest {
            prompt: "write code",
            n: 1,
            seed: 5,
            generation: 0,
        });
        assert_eq!(out, vec!["int main(){}\n"]);
        let seen = server.join().unwrap();
        assert!(seen.starts_with("POST /v1/chat/completions"));
        assert!(seen.contains("\"write code\""));
    }

    #[test]
    fn endpoint_failure_yields_fewer_texts() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = serve_once(listener, "500 Internal Server Error", "{}".into());
        let mut g = EndpointGenerator::new(EndpointConfig::new(format!("http://{addr}")));
        let out = g.generate(&GenerationRequest {
            prompt: "p",
            n: 1,
            seed: 0,
            generation: 0,
        });
        assert!(out.is_empty());
        server.join().unwrap();
    }
}
