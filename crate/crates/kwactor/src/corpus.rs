//! Actor references, snippet ingestion, and tokenization.
//!
//! A corpus is the set of result snippets returned for one query term
//! (usually an actor's name). Snippets arrive either from a JSON-lines
//! fixture file or from a live search adapter behind [`SnippetProvider`].

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of snippets retained per query term.
pub const DEFAULT_SNIPPET_LIMIT: usize = 500;
/// Default per-snippet token clip.
pub const DEFAULT_MAX_SNIPPET_LEN: usize = 50;

/// A named social actor under study.
///
/// `variant_labels` are alternative spellings that still denote the same
/// person; `ambiguous_labels` are observable strings shared with other
/// actors and therefore unusable as discriminating queries on their own.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActorRef {
    pub canonical_name: String,
    pub variant_labels: Vec<String>,
    pub ambiguous_labels: Vec<String>,
    pub category_hint: Option<String>,
}

impl ActorRef {
    pub fn new(canonical_name: &str) -> Result<Self> {
        Self::with_labels(canonical_name, Vec::new(), Vec::new(), None)
    }

    pub fn with_labels(
        canonical_name: &str,
        variant_labels: Vec<String>,
        ambiguous_labels: Vec<String>,
        category_hint: Option<String>,
    ) -> Result<Self> {
        if canonical_name.trim().is_empty() {
            return Err(Error::Config("actor name must be non-empty".into()));
        }
        let mut seen = BTreeSet::new();
        for label in variant_labels.iter().chain(ambiguous_labels.iter()) {
            if label == canonical_name {
                return Err(Error::Config(format!(
                    "label {label:?} duplicates the canonical name"
                )));
            }
            if !seen.insert(label.clone()) {
                return Err(Error::Config(format!("duplicate label {label:?}")));
            }
        }
        Ok(ActorRef {
            canonical_name: canonical_name.to_string(),
            variant_labels,
            ambiguous_labels,
            category_hint,
        })
    }

    /// Every label under which this actor can be observed in search results.
    pub fn observable_labels(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.canonical_name.as_str())
            .chain(self.variant_labels.iter().map(String::as_str))
            .chain(self.ambiguous_labels.iter().map(String::as_str))
    }

    /// Tokens of the canonical name, used to exclude the query's own words
    /// from candidate vocabularies.
    pub fn name_tokens(&self) -> BTreeSet<String> {
        self.observable_labels()
            .flat_map(tokenize)
            .collect()
    }
}

/// One search-result snippet, already tokenized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snippet {
    pub query_term: String,
    pub rank: u32,
    pub tokens: Vec<String>,
    pub raw_text: String,
}

impl Snippet {
    /// Builds a snippet from pre-tokenized input, enforcing the token
    /// invariants (non-empty, lowercase, whitespace-free, at least one token).
    pub fn new(query_term: &str, rank: u32, tokens: Vec<String>, raw_text: &str) -> Result<Self> {
        if rank < 1 {
            return Err(Error::Config(format!("snippet rank must be >= 1, got {rank}")));
        }
        if tokens.is_empty() {
            return Err(Error::Config("snippet must contain at least one token".into()));
        }
        for t in &tokens {
            let ok = !t.is_empty()
                && !t.chars().any(char::is_whitespace)
                && *t == t.to_lowercase();
            if !ok {
                return Err(Error::Config(format!("malformed snippet token {t:?}")));
            }
        }
        Ok(Snippet {
            query_term: query_term.to_string(),
            rank,
            tokens,
            raw_text: raw_text.to_string(),
        })
    }

    /// Tokenizes `raw_text` and clips to `max_len` tokens. Returns `None`
    /// when nothing tokenizable survives (such snippets are skipped).
    pub fn from_raw(
        query_term: &str,
        rank: u32,
        raw_text: &str,
        max_len: usize,
        stopwords: Option<&BTreeSet<String>>,
    ) -> Result<Option<Self>> {
        let mut tokens = tokenize(raw_text);
        if let Some(stop) = stopwords {
            tokens.retain(|t| !stop.contains(t));
        }
        tokens.truncate(max_len);
        if tokens.is_empty() {
            return Ok(None);
        }
        Snippet::new(query_term, rank, tokens, raw_text).map(Some)
    }
}

/// All snippets retained for one query term, in ascending rank order.
#[derive(Debug, Clone, PartialEq)]
pub struct SnippetCorpus {
    pub actor: ActorRef,
    snippets: Vec<Snippet>,
    /// Retrieval timestamp for live fetches; `None` for fixture corpora.
    pub retrieved_at: Option<String>,
}

impl SnippetCorpus {
    pub fn new(actor: ActorRef, snippets: Vec<Snippet>) -> Self {
        SnippetCorpus { actor, snippets, retrieved_at: None }
    }

    pub fn empty(label: &str) -> Result<Self> {
        Ok(SnippetCorpus::new(ActorRef::new(label)?, Vec::new()))
    }

    /// Number of snippets (the `N` used by document-frequency statistics).
    pub fn n(&self) -> usize {
        self.snippets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snippets.is_empty()
    }

    pub fn snippets(&self) -> &[Snippet] {
        &self.snippets
    }

    /// Writes the corpus back out in the fixture format. Loading the result
    /// with the same options reproduces this corpus exactly.
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        for s in &self.snippets {
            let rec = RawRecord {
                actor: s.query_term.clone(),
                rank: s.rank,
                text: s.raw_text.clone(),
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Loads a plain word list: one entry per line, `#` comments and blank
/// lines ignored, entries normalized through the snippet tokenizer.
pub fn load_wordlist(path: &Path) -> Result<BTreeSet<String>> {
    let data = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut words = BTreeSet::new();
    for line in data.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        words.extend(tokenize(line));
    }
    Ok(words)
}

/// Lowercases, splits on non-alphanumeric characters, and drops empty and
/// purely numeric fragments. Mixed alphanumeric tokens survive; token order
/// follows the input.
pub fn tokenize(raw_text: &str) -> Vec<String> {
    // Lowercasing the whole text first keeps tokenization idempotent: some
    // uppercase letters lowercase to a letter plus a combining mark, which
    // must be split away rather than smuggled into a token.
    raw_text
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|frag| !frag.is_empty())
        .filter(|frag| !frag.chars().all(char::is_numeric))
        .map(str::to_string)
        .collect()
}

/// Knobs for fixture ingestion.
#[derive(Debug, Clone)]
pub struct CorpusOptions {
    pub snippet_limit: usize,
    pub max_snippet_len: usize,
    /// Tokens dropped at ingestion. Empty by default: common function words
    /// stay in the vocabulary and are suppressed by their low weights instead.
    pub stopwords: Option<BTreeSet<String>>,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            snippet_limit: DEFAULT_SNIPPET_LIMIT,
            max_snippet_len: DEFAULT_MAX_SNIPPET_LEN,
            stopwords: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    actor: String,
    rank: u32,
    text: String,
}

/// Loads every record whose `actor` field equals `actor_label` from a
/// JSON-lines fixture, with default options.
pub fn load_corpus(path: &Path, actor_label: &str) -> Result<SnippetCorpus> {
    load_corpus_with(path, actor_label, &CorpusOptions::default())
}

/// As [`load_corpus`], with explicit limits and stopword handling.
///
/// Records are sorted by ascending rank (duplicates kept) and then truncated
/// to `snippet_limit`. Snippet texts are clipped to `max_snippet_len` tokens,
/// never rejected for length.
pub fn load_corpus_with(
    path: &Path,
    actor_label: &str,
    options: &CorpusOptions,
) -> Result<SnippetCorpus> {
    let data = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut snippets = Vec::new();
    for (idx, line) in data.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        if rec.rank < 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("rank must be >= 1, got {}", rec.rank),
            });
        }
        if rec.actor != actor_label {
            continue;
        }
        if let Some(snippet) = Snippet::from_raw(
            actor_label,
            rec.rank,
            &rec.text,
            options.max_snippet_len,
            options.stopwords.as_ref(),
        )? {
            snippets.push(snippet);
        }
    }
    if snippets.is_empty() {
        return Err(Error::EmptyCorpus {
            label: actor_label.to_string(),
            path: path.to_path_buf(),
        });
    }
    snippets.sort_by_key(|s| s.rank);
    snippets.truncate(options.snippet_limit);
    Ok(SnippetCorpus::new(ActorRef::new(actor_label)?, snippets))
}

/// Source of snippets for a query term: a fixture directory by default, or
/// a live search adapter when the run is configured for it.
pub trait SnippetProvider {
    fn fetch(&self, term: &str, limit: usize) -> Result<SnippetCorpus>;
}

/// Fixture-backed provider. Never performs network I/O.
pub struct OfflineSnippetProvider {
    path: PathBuf,
    options: CorpusOptions,
}

impl OfflineSnippetProvider {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self::with_options(path, CorpusOptions::default())
    }

    pub fn with_options(path: impl Into<PathBuf>, options: CorpusOptions) -> Self {
        OfflineSnippetProvider { path: path.into(), options }
    }
}

impl SnippetProvider for OfflineSnippetProvider {
    fn fetch(&self, term: &str, limit: usize) -> Result<SnippetCorpus> {
        let options = CorpusOptions {
            snippet_limit: limit,
            ..self.options.clone()
        };
        load_corpus_with(&self.path, term, &options)
    }
}

/// Fetches up to `limit` snippets for `term`. A limit of zero yields an
/// empty corpus without consulting the provider at all.
pub fn fetch_snippets(
    provider: &dyn SnippetProvider,
    term: &str,
    limit: usize,
) -> Result<SnippetCorpus> {
    if limit == 0 {
        return SnippetCorpus::empty(term);
    }
    provider.fetch(term, limit)
}
