//! Behaviour descriptors for the archive: code length, cyclomatic complexity
//! and synchronization-primitive frequency, each discretized into bins.

use serde::{Deserialize, Serialize};

use crate::lexer::{self, TokenKind};
use crate::task::LanguageTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub code_length_bin: u8,
    pub complexity_bin: u8,
    pub sync_freq_bin: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawFeatures {
    pub code_lines: usize,
    pub complexity: usize,
    pub sync_frequency: f64,
}

/// Bin `i` holds values `v` with `edges[i-1] <= v < edges[i]`; edges must be
/// strictly increasing. `n` edges give `n + 1` bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BinEdges(pub Vec<f64>);

impl BinEdges {
    pub fn bin(&self, value: f64) -> u8 {
        self.0.iter().take_while(|&&e| value >= e).count() as u8
    }

    pub fn bin_count(&self) -> usize {
        self.0.len() + 1
    }

    fn valid(&self) -> bool {
        self.0.len() < u8::MAX as usize && self.0.windows(2).all(|w| w[0] < w[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinConfig {
    pub code_length: BinEdges,
    pub complexity: BinEdges,
    pub sync_frequency: BinEdges,
}

impl Default for BinConfig {
    /// 4 × 4 × 4 grid. The first sync edge is the smallest positive float,
    /// so bin 0 holds exactly the sources with no synchronization tokens.
    fn default() -> Self {
        BinConfig {
            code_length: BinEdges(vec![50.0, 200.0, 800.0]),
            complexity: BinEdges(vec![5.0, 15.0, 40.0]),
            sync_frequency: BinEdges(vec![f64::MIN_POSITIVE, 0.005, 0.02]),
        }
    }
}

impl BinConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, edges) in [
            ("code_length", &self.code_length),
            ("complexity", &self.complexity),
            ("sync_frequency", &self.sync_frequency),
        ] {
            if !edges.valid() {
                return Err(format!("{name} bin edges must be strictly increasing"));
            }
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.code_length.bin_count() * self.complexity.bin_count() * self.sync_frequency.bin_count()
    }

    pub fn contains(&self, d: &FeatureDescriptor) -> bool {
        (d.code_length_bin as usize) < self.code_length.bin_count()
            && (d.complexity_bin as usize) < self.complexity.bin_count()
            && (d.sync_freq_bin as usize) < self.sync_frequency.bin_count()
    }

    pub fn descriptor(&self, raw: &RawFeatures) -> FeatureDescriptor {
        FeatureDescriptor {
            code_length_bin: self.code_length.bin(raw.code_lines as f64),
            complexity_bin: self.complexity.bin(raw.complexity as f64),
            sync_freq_bin: self.sync_frequency.bin(raw.sync_frequency),
        }
    }
}

/// Token tables for one language. Lexicon entries ending in `*` match by
/// prefix; everything else matches exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTable {
    pub decision_points: Vec<String>,
    pub sync_lexicon: Vec<String>,
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl TokenTable {
    pub fn for_language(lang: LanguageTag) -> TokenTable {
        let cxx_decisions = ["if", "for", "while", "case", "catch", "&&", "||", "?"];
        let rust_decisions = ["if", "for", "while", "loop", "=>", "&&", "||"];
        let cxx_sync = [
            "atomic*",
            "mutex",
            "shared_mutex",
            "recursive_mutex",
            "lock",
            "unlock",
            "try_lock",
            "lock_guard",
            "unique_lock",
            "scoped_lock",
            "shared_lock",
            "compare_exchange*",
            "fetch_*",
            "compare_and_swap",
            "write_min",
            "write_max",
            "write_add",
            "condition_variable",
            "barrier",
            "latch",
        ];
        let rust_sync = [
            "Atomic*",
            "atomic*",
            "Mutex",
            "RwLock",
            "lock",
            "try_lock",
            "compare_exchange*",
            "fetch_*",
            "fence",
            "compiler_fence",
            "Condvar",
            "Barrier",
        ];
        match lang {
            LanguageTag::CxxParlay => TokenTable {
                decision_points: words(&cxx_decisions),
                sync_lexicon: words(&cxx_sync),
            },
            LanguageTag::RustRayon => TokenTable {
                decision_points: words(&rust_decisions),
                sync_lexicon: words(&rust_sync),
            },
            LanguageTag::Other => {
                let mut decisions = words(&cxx_decisions);
                decisions.extend(words(&["loop", "=>"]));
                let mut sync = words(&cxx_sync);
                sync.extend(words(&rust_sync));
                sync.sort();
                sync.dedup();
                TokenTable {
                    decision_points: decisions,
                    sync_lexicon: sync,
                }
            }
        }
    }

    fn is_decision(&self, tok: &str) -> bool {
        self.decision_points.iter().any(|d| d == tok)
    }

    fn is_sync(&self, tok: &str) -> bool {
        self.sync_lexicon.iter().any(|entry| match entry.strip_suffix('*') {
            Some(prefix) => tok.starts_with(prefix),
            None => entry == tok,
        })
    }
}

pub fn raw_features(source: &str, lang: LanguageTag, table: &TokenTable) -> RawFeatures {
    let stripped = lexer::strip_comments(source, lang);
    let code_lines = stripped.lines().filter(|l| !l.trim().is_empty()).count();
    let tokens = lexer::tokenize(&stripped, lang);
    let mut decisions = 0usize;
    let mut sync = 0usize;
    for tok in &tokens {
        if tok.kind == TokenKind::Literal {
            continue;
        }
        if table.is_decision(tok.text) {
            decisions += 1;
        }
        if tok.kind == TokenKind::Ident && table.is_sync(tok.text) {
            sync += 1;
        }
    }
    RawFeatures {
        code_lines,
        complexity: 1 + decisions,
        sync_frequency: sync as f64 / tokens.len().max(1) as f64,
    }
}

pub fn extract_features(source: &str, lang: LanguageTag, table: &TokenTable, bins: &BinConfig) -> FeatureDescriptor {
    bins.descriptor(&raw_features(source, lang, table))
}
