//! Snippet-frequency statistics and candidate-word selection.
//!
//! Each vocabulary word receives a TF.IDF weight over the actor's snippet
//! corpus. Term frequency sums, snippet by snippet, the word's occurrence
//! count divided by that snippet's token count; document frequency counts
//! snippets containing the word at least once. Weights are normalized by
//! the corpus-wide maximum, so the strongest word always scores v = 1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{ActorRef, SnippetCorpus};
use crate::error::{Error, Result};

pub const DEFAULT_TFIDF_FRAC: f64 = 0.3;
pub const DEFAULT_WORD_CAP: usize = 30;

/// Per-word corpus statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermStats {
    pub word: String,
    /// Sum over snippets of occurrences / snippet token count.
    pub tf: f64,
    /// Number of snippets containing the word.
    pub df: usize,
    pub tfidf: f64,
    /// TF.IDF divided by the highest TF.IDF in the corpus.
    pub v: f64,
}

/// Candidate words for one actor, sorted by descending v (ties broken by
/// word order) and capped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub actor: ActorRef,
    pub candidates: Vec<TermStats>,
    pub frac_threshold: f64,
    pub cap: usize,
    pub warnings: Vec<String>,
}

impl CandidateSet {
    pub fn words(&self) -> Vec<String> {
        self.candidates.iter().map(|t| t.word.clone()).collect()
    }

    pub fn v_of(&self, word: &str) -> Option<f64> {
        self.candidates.iter().find(|t| t.word == word).map(|t| t.v)
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Builds a candidate set directly from `(word, v)` scores, applying the
    /// usual ordering, threshold, and cap. Intended for regression fixtures
    /// and callers that obtained v scores elsewhere.
    pub fn from_scores(
        actor: ActorRef,
        scores: &[(String, f64)],
        frac_threshold: f64,
        cap: usize,
    ) -> Result<Self> {
        validate_knobs(frac_threshold, cap)?;
        let stats: Vec<TermStats> = scores
            .iter()
            .map(|(word, v)| TermStats {
                word: word.clone(),
                tf: *v,
                df: 1,
                tfidf: *v,
                v: *v,
            })
            .collect();
        Ok(assemble(actor, stats, frac_threshold, cap))
    }
}

/// Selection knobs for [`candidate_words_with`].
#[derive(Debug, Clone)]
pub struct CandidateOptions {
    pub frac_threshold: f64,
    pub cap: usize,
    /// Keep tokens of the actor's own name in the vocabulary. Off by
    /// default: the name is part of every query, so its tokens discriminate
    /// nothing.
    pub keep_name_tokens: bool,
    /// Logarithm base for document frequency; natural log when `None`.
    /// Normalized v scores do not depend on this choice.
    pub log_base: Option<f64>,
}

impl Default for CandidateOptions {
    fn default() -> Self {
        CandidateOptions {
            frac_threshold: DEFAULT_TFIDF_FRAC,
            cap: DEFAULT_WORD_CAP,
            keep_name_tokens: false,
            log_base: None,
        }
    }
}

/// Sum over snippets of (occurrences of `word`) / (snippet token count).
/// Zero for words absent from the corpus.
pub fn term_frequency(word: &str, corpus: &SnippetCorpus) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::UndefinedStatistic(
            "term frequency over an empty corpus".into(),
        ));
    }
    let mut tf = 0.0;
    for snippet in corpus.snippets() {
        let occurrences = snippet.tokens.iter().filter(|t| *t == word).count();
        if occurrences > 0 {
            tf += occurrences as f64 / snippet.tokens.len() as f64;
        }
    }
    Ok(tf)
}

/// Number of snippets containing `word`.
pub fn document_frequency(word: &str, corpus: &SnippetCorpus) -> usize {
    corpus
        .snippets()
        .iter()
        .filter(|s| s.tokens.iter().any(|t| t == word))
        .count()
}

/// Natural log of N / df. Undefined (an error) when the word appears in no
/// snippet; zero when it appears in all of them.
pub fn inverse_document_frequency(word: &str, corpus: &SnippetCorpus) -> Result<f64> {
    if corpus.is_empty() {
        return Err(Error::UndefinedStatistic(
            "document frequency over an empty corpus".into(),
        ));
    }
    let df = document_frequency(word, corpus);
    if df == 0 {
        return Err(Error::UndefinedStatistic(format!(
            "idf of {word:?}, which appears in no snippet"
        )));
    }
    Ok((corpus.n() as f64 / df as f64).ln())
}

/// TF.IDF statistics for the whole vocabulary (after name-token exclusion),
/// v-normalized, sorted by descending v with ties broken by word order.
/// Returns an empty list when every weight is zero.
pub fn vocabulary_stats(corpus: &SnippetCorpus, options: &CandidateOptions) -> Result<Vec<TermStats>> {
    if corpus.is_empty() {
        return Err(Error::UndefinedStatistic(
            "vocabulary statistics over an empty corpus".into(),
        ));
    }
    let excluded = if options.keep_name_tokens {
        Default::default()
    } else {
        corpus.actor.name_tokens()
    };

    // One pass: accumulate tf and df per word.
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for snippet in corpus.snippets() {
        let len = snippet.tokens.len() as f64;
        let mut in_snippet: BTreeMap<&str, usize> = BTreeMap::new();
        for token in &snippet.tokens {
            if excluded.contains(token) {
                continue;
            }
            *in_snippet.entry(token).or_insert(0) += 1;
        }
        for (word, count) in in_snippet {
            let entry = acc.entry(word).or_insert((0.0, 0));
            entry.0 += count as f64 / len;
            entry.1 += 1;
        }
    }

    let n = corpus.n() as f64;
    let log = |x: f64| match options.log_base {
        Some(base) => x.log(base),
        None => x.ln(),
    };
    let mut stats: Vec<TermStats> = acc
        .into_iter()
        .map(|(word, (tf, df))| {
            let tfidf = tf * log(n / df as f64);
            TermStats { word: word.to_string(), tf, df, tfidf, v: 0.0 }
        })
        .collect();

    let hs = stats.iter().map(|t| t.tfidf).fold(0.0_f64, f64::max);
    if hs <= 0.0 {
        return Ok(Vec::new());
    }
    for t in &mut stats {
        t.v = t.tfidf / hs;
    }
    stats.sort_by(|a, b| b.v.total_cmp(&a.v).then_with(|| a.word.cmp(&b.word)));
    Ok(stats)
}

/// Candidate words with default name-token handling and natural-log idf.
pub fn candidate_words(
    corpus: &SnippetCorpus,
    frac_threshold: f64,
    cap: usize,
) -> Result<CandidateSet> {
    candidate_words_with(
        corpus,
        &CandidateOptions { frac_threshold, cap, ..CandidateOptions::default() },
    )
}

/// Words whose normalized weight strictly exceeds `frac_threshold` times the
/// corpus maximum, capped at `cap` entries. The top-weighted word always
/// qualifies. When every TF.IDF weight is zero the set is empty and carries
/// a warning instead of failing.
pub fn candidate_words_with(
    corpus: &SnippetCorpus,
    options: &CandidateOptions,
) -> Result<CandidateSet> {
    validate_knobs(options.frac_threshold, options.cap)?;
    if let Some(base) = options.log_base {
        if base <= 0.0 || base == 1.0 {
            return Err(Error::Config(format!("invalid log base {base}")));
        }
    }
    let stats = vocabulary_stats(corpus, options)?;
    let mut set = assemble(
        corpus.actor.clone(),
        stats,
        options.frac_threshold,
        options.cap,
    );
    if set.candidates.is_empty() {
        set.warnings.push(
            "every word has zero TF.IDF weight; no candidates selected".to_string(),
        );
    }
    Ok(set)
}

fn validate_knobs(frac_threshold: f64, cap: usize) -> Result<()> {
    if !(frac_threshold > 0.0 && frac_threshold < 1.0) {
        return Err(Error::Config(format!(
            "tfidf fraction must lie strictly between 0 and 1, got {frac_threshold}"
        )));
    }
    if cap < 1 {
        return Err(Error::Config("word cap must be at least 1".into()));
    }
    Ok(())
}

fn assemble(
    actor: ActorRef,
    mut stats: Vec<TermStats>,
    frac_threshold: f64,
    cap: usize,
) -> CandidateSet {
    stats.sort_by(|a, b| b.v.total_cmp(&a.v).then_with(|| a.word.cmp(&b.word)));
    let kept: Vec<TermStats> = stats
        .into_iter()
        .enumerate()
        .filter(|(i, t)| *i == 0 || t.v > frac_threshold)
        .map(|(_, t)| t)
        .take(cap)
        .collect();
    CandidateSet {
        actor,
        candidates: kept,
        frac_threshold,
        cap,
        warnings: Vec::new(),
    }
}
