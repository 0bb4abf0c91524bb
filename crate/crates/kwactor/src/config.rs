//! Run configuration shared by the library pipeline and the CLI.

use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cooccur::UMode;
use crate::corpus::{DEFAULT_MAX_SNIPPET_LEN, DEFAULT_SNIPPET_LIMIT};
use crate::error::{Error, Result};
use crate::graph::DEFAULT_CUT_DEGREE;
use crate::selection::ProximityMode;
use crate::weighting::{DEFAULT_TFIDF_FRAC, DEFAULT_WORD_CAP};

/// Every knob of one extraction run. Hashing the serialized form yields the
/// provenance config hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Directory holding `snippets.jsonl` and `hits.json`.
    pub fixtures_dir: PathBuf,
    pub snippet_limit: usize,
    pub max_snippet_len: usize,
    pub tfidf_frac: f64,
    pub word_cap: usize,
    pub cut_degree: usize,
    pub u_mode: UMode,
    pub proximity_mode: ProximityMode,
    pub top_k: usize,
    /// Query a live search endpoint instead of fixtures. Off by default;
    /// no command performs network I/O while this is off.
    pub live: bool,
    pub endpoint: Option<String>,
    pub keep_name_tokens: bool,
    pub stopwords_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            fixtures_dir: PathBuf::from("fixtures"),
            snippet_limit: DEFAULT_SNIPPET_LIMIT,
            max_snippet_len: DEFAULT_MAX_SNIPPET_LEN,
            tfidf_frac: DEFAULT_TFIDF_FRAC,
            word_cap: DEFAULT_WORD_CAP,
            cut_degree: DEFAULT_CUT_DEGREE,
            u_mode: UMode::Singleton,
            proximity_mode: ProximityMode::OverlapCount,
            top_k: 1,
            live: false,
            endpoint: None,
            keep_name_tokens: false,
            stopwords_path: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("snippet-limit", self.snippet_limit),
            ("max-snippet-len", self.max_snippet_len),
            ("word-cap", self.word_cap),
            ("cut-degree", self.cut_degree),
            ("top-k", self.top_k),
        ];
        for (name, value) in positive {
            if value < 1 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.tfidf_frac > 0.0 && self.tfidf_frac < 1.0) {
            return Err(Error::Config(format!(
                "tfidf-frac must lie strictly between 0 and 1, got {}",
                self.tfidf_frac
            )));
        }
        if self.live && self.endpoint.is_none() {
            return Err(Error::Config(
                "live mode needs an --endpoint base URL".into(),
            ));
        }
        Ok(())
    }

    /// Hash over the serialized configuration, stable across runs.
    pub fn config_hash(&self) -> String {
        let body = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(body.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }
}
