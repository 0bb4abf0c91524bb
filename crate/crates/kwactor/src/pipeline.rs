//! End-to-end extraction: snippets, candidate weighting, the co-occurrence
//! graph, cluster selection, and the final keyword, driven by one
//! [`RunConfig`].
//!
//! Offline runs read `snippets.jsonl` and `hits.json` from the configured
//! fixtures directory and never touch the network. Live runs swap in the
//! HTTP adapters; everything downstream of the providers is identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::cooccur::{u_vector, HitCounter, OfflineHitSource};
use crate::corpus::{
    fetch_snippets, load_wordlist, CorpusOptions, OfflineSnippetProvider, SnippetCorpus,
    SnippetProvider,
};
use crate::error::{Error, Result};
use crate::graph::{build_word_graph, max_spanning_forest, separate_trees, ForestDump, WordForest};
use crate::live::{LiveHitSource, LiveSnippetProvider};
use crate::selection::{pick_keyword, select_cluster, RankedWord, StableAttribute};
use crate::weighting::{candidate_words_with, CandidateOptions, CandidateSet};

pub fn snippets_path(config: &RunConfig) -> PathBuf {
    config.fixtures_dir.join("snippets.jsonl")
}

pub fn hits_path(config: &RunConfig) -> PathBuf {
    config.fixtures_dir.join("hits.json")
}

fn corpus_options(config: &RunConfig) -> Result<CorpusOptions> {
    let stopwords = match &config.stopwords_path {
        Some(path) => Some(load_wordlist(path)?),
        None => None,
    };
    Ok(CorpusOptions {
        snippet_limit: config.snippet_limit,
        max_snippet_len: config.max_snippet_len,
        stopwords,
    })
}

fn endpoint(config: &RunConfig) -> Result<&str> {
    config
        .endpoint
        .as_deref()
        .ok_or_else(|| Error::Config("live mode needs an --endpoint base URL".into()))
}

/// Snippet source selected by the configuration. Offline by default; the
/// live adapter is only constructed when `live` is set.
pub fn snippet_provider(config: &RunConfig) -> Result<Box<dyn SnippetProvider>> {
    let options = corpus_options(config)?;
    if config.live {
        Ok(Box::new(LiveSnippetProvider::new(endpoint(config)?, options)?))
    } else {
        Ok(Box::new(OfflineSnippetProvider::with_options(
            snippets_path(config),
            options,
        )))
    }
}

/// Hit-count source selected by the configuration, wrapped in a memoizing
/// counter.
pub fn hit_counter(config: &RunConfig) -> Result<HitCounter> {
    let source: Box<dyn crate::cooccur::HitSource> = if config.live {
        Box::new(LiveHitSource::new(endpoint(config)?)?)
    } else {
        Box::new(OfflineHitSource::from_file(&hits_path(config))?)
    };
    Ok(HitCounter::new(source))
}

pub fn load_actor_corpus(config: &RunConfig, actor_label: &str) -> Result<SnippetCorpus> {
    let provider = snippet_provider(config)?;
    fetch_snippets(provider.as_ref(), actor_label, config.snippet_limit)
}

pub fn candidates_for(config: &RunConfig, corpus: &SnippetCorpus) -> Result<CandidateSet> {
    candidate_words_with(
        corpus,
        &CandidateOptions {
            frac_threshold: config.tfidf_frac,
            cap: config.word_cap,
            keep_name_tokens: config.keep_name_tokens,
            log_base: None,
        },
    )
}

/// Result of one extraction run in its serialized form. `keyword` is `None`
/// when no cluster could be produced; the warnings then say why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractOutput {
    pub actor: String,
    pub keyword: Option<String>,
    /// Prefix of `ranking`, `top_k` entries long.
    pub keywords: Vec<String>,
    pub query: Option<String>,
    pub ranking: Vec<RankedWord>,
    pub cluster: Vec<String>,
    pub warnings: Vec<String>,
}

fn no_cluster_output(actor: &str, carried: &[String], reason: &str) -> ExtractOutput {
    let mut warnings = carried.to_vec();
    warnings.push(format!("no cluster: {reason}"));
    ExtractOutput {
        actor: actor.to_string(),
        keyword: None,
        keywords: Vec::new(),
        query: None,
        ranking: Vec::new(),
        cluster: Vec::new(),
        warnings,
    }
}

/// Runs the whole pipeline for one actor. An actor for which no cluster
/// exists yields an output with `keyword: null` rather than an error, so
/// batch runs can report it alongside ordinary results.
pub fn extract(config: &RunConfig, actor_label: &str, sk: &StableAttribute) -> Result<ExtractOutput> {
    config.validate()?;
    let corpus = load_actor_corpus(config, actor_label)?;
    let candidates = candidates_for(config, &corpus)?;
    if candidates.is_empty() {
        return Ok(no_cluster_output(
            actor_label,
            &candidates.warnings,
            "no candidate words cleared the weight threshold",
        ));
    }
    let counter = hit_counter(config)?;
    let graph = build_word_graph(&candidates, &counter)?;
    let forest = separate_trees(max_spanning_forest(&graph), config.cut_degree)?;
    let cluster = match select_cluster(&forest, sk, &candidates, Some(&counter), config.proximity_mode)
    {
        Ok(cluster) => cluster,
        Err(Error::NoCluster { reason, .. }) => {
            return Ok(no_cluster_output(actor_label, &candidates.warnings, &reason));
        }
        Err(other) => return Err(other),
    };
    let words = candidates.words();
    let u = u_vector(&words, &counter, config.u_mode, Some(actor_label))?;
    let result = pick_keyword(&cluster, &candidates, &u)?;

    let mut warnings = candidates.warnings.clone();
    warnings.extend(result.warnings.iter().cloned());
    let keywords: Vec<String> = result
        .ranking
        .iter()
        .take(config.top_k)
        .map(|r| r.word.clone())
        .collect();
    Ok(ExtractOutput {
        actor: actor_label.to_string(),
        keyword: Some(result.keyword.clone()),
        keywords,
        query: Some(result.rewritten_query.clone()),
        ranking: result.ranking,
        cluster: result.chosen_cluster,
        warnings,
    })
}

/// Extracts a batch of actors in parallel. Results come back in input
/// order, one per actor, hard failures included.
pub fn extract_many(
    config: &RunConfig,
    actors: &[String],
    sk: &StableAttribute,
) -> Vec<(String, Result<ExtractOutput>)> {
    actors
        .par_iter()
        .map(|label| (label.clone(), extract(config, label, sk)))
        .collect()
}

/// The intermediate structures behind one extraction, for inspection.
#[derive(Debug, Clone, Serialize)]
pub struct ExplainOutput {
    pub actor: String,
    pub candidates: Vec<String>,
    pub forest: ForestDump,
    pub clusters: Vec<Vec<String>>,
}

/// Builds the separated forest for one actor without selecting a cluster.
pub fn explain(config: &RunConfig, actor_label: &str) -> Result<(ExplainOutput, WordForest)> {
    config.validate()?;
    let corpus = load_actor_corpus(config, actor_label)?;
    let candidates = candidates_for(config, &corpus)?;
    if candidates.is_empty() {
        return Err(Error::NoCluster {
            label: actor_label.to_string(),
            reason: "no candidate words cleared the weight threshold".into(),
        });
    }
    let counter = hit_counter(config)?;
    let graph = build_word_graph(&candidates, &counter)?;
    let forest = separate_trees(max_spanning_forest(&graph), config.cut_degree)?;
    let output = ExplainOutput {
        actor: actor_label.to_string(),
        candidates: candidates.words(),
        forest: forest.dump(),
        clusters: forest.clusters(),
    };
    Ok((output, forest))
}

/// What went into a run: the configuration hash and a digest of every input
/// file that was readable at launch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
}

pub fn provenance(config: &RunConfig, extra_inputs: &[&Path]) -> Provenance {
    let mut paths: Vec<PathBuf> = Vec::new();
    if !config.live {
        paths.push(snippets_path(config));
        paths.push(hits_path(config));
    }
    if let Some(stopwords) = &config.stopwords_path {
        paths.push(stopwords.clone());
    }
    paths.extend(extra_inputs.iter().map(|p| p.to_path_buf()));

    let mut inputs = BTreeMap::new();
    for path in paths {
        if let Ok(bytes) = fs::read(&path) {
            let digest = Sha256::digest(&bytes);
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            inputs.insert(path.display().to_string(), format!("sha256:{hex}"));
        }
    }
    Provenance {
        config_hash: config.config_hash(),
        inputs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooccur::{canonical_doubleton_query, canonical_singleton_query};
    use std::collections::BTreeSet;

    // Small self-contained fixture: "quantum" carries the highest weight and
    // the lowest hit count, so it must win the delta ranking. The positive
    // doubletons chain all seven candidate words into one spanning path, so
    // separation at degree 2 leaves a single cluster.
    fn write_fixture(dir: &Path) {
        let snippets = [
            r#"{"actor":"jane roe","rank":1,"text":"quantum quantum computing lab"}"#,
            r#"{"actor":"jane roe","rank":2,"text":"quantum computing research"}"#,
            r#"{"actor":"jane roe","rank":3,"text":"garden flowers blooming research"}"#,
            r#"{"actor":"john doe","rank":1,"text":"same words here"}"#,
            r#"{"actor":"john doe","rank":2,"text":"same words here"}"#,
            r#"{"actor":"john doe","rank":3,"text":"here words same"}"#,
        ];
        fs::write(dir.join("snippets.jsonl"), snippets.join("\n") + "\n").unwrap();

        let words = [
            ("quantum", 1000_u64),
            ("computing", 5000),
            ("lab", 8000),
            ("research", 9000),
            ("garden", 7000),
            ("flowers", 6000),
            ("blooming", 4000),
        ];
        let chain = [
            ("quantum", "computing", 800_u64),
            ("computing", "lab", 300),
            ("lab", "research", 200),
            ("research", "garden", 5),
            ("garden", "flowers", 700),
            ("flowers", "blooming", 600),
        ];
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for (w, c) in words {
            counts.insert(canonical_singleton_query(w), c);
        }
        let named: Vec<&str> = words.iter().map(|(w, _)| *w).collect();
        for (i, a) in named.iter().enumerate() {
            for b in &named[i + 1..] {
                counts.insert(canonical_doubleton_query(a, b), 0);
            }
        }
        for (a, b, c) in chain {
            counts.insert(canonical_doubleton_query(a, b), c);
        }
        fs::write(
            dir.join("hits.json"),
            serde_json::to_string_pretty(&counts).unwrap(),
        )
        .unwrap();
    }

    fn fixture_config(dir: &Path) -> RunConfig {
        RunConfig {
            fixtures_dir: dir.to_path_buf(),
            ..RunConfig::default()
        }
    }

    fn sk() -> StableAttribute {
        let words: BTreeSet<String> = ["computing"].iter().map(|s| s.to_string()).collect();
        StableAttribute::new("science", words).unwrap()
    }

    #[test]
    fn extract_runs_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let config = fixture_config(dir.path());
        let output = extract(&config, "jane roe", &sk()).unwrap();
        assert_eq!(output.keyword.as_deref(), Some("quantum"));
        assert_eq!(output.query.as_deref(), Some("\"jane roe\" \"quantum\""));
        assert_eq!(output.keywords, vec!["quantum".to_string()]);
        assert_eq!(output.cluster.len(), 7);
        assert_eq!(output.ranking.len(), 7);
        assert!(output.warnings.is_empty());
    }

    #[test]
    fn repeated_runs_serialize_identically() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let config = fixture_config(dir.path());
        let first = serde_json::to_string(&extract(&config, "jane roe", &sk()).unwrap()).unwrap();
        let second = serde_json::to_string(&extract(&config, "jane roe", &sk()).unwrap()).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn uniform_corpus_yields_a_no_cluster_output() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let config = fixture_config(dir.path());
        let output = extract(&config, "john doe", &sk()).unwrap();
        assert_eq!(output.keyword, None);
        assert_eq!(output.query, None);
        assert!(output.cluster.is_empty());
        assert!(
            output.warnings.iter().any(|w| w.contains("no cluster")),
            "{:?}",
            output.warnings
        );
    }

    #[test]
    fn top_k_takes_a_ranking_prefix() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let mut config = fixture_config(dir.path());
        config.top_k = 3;
        let output = extract(&config, "jane roe", &sk()).unwrap();
        assert_eq!(output.keywords.len(), 3);
        assert_eq!(output.keywords[0], "quantum");
        let from_ranking: Vec<String> = output.ranking[..3].iter().map(|r| r.word.clone()).collect();
        assert_eq!(output.keywords, from_ranking);
    }

    #[test]
    fn batch_extraction_preserves_input_order() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let config = fixture_config(dir.path());
        let actors = vec!["jane roe".to_string(), "john doe".to_string()];
        let results = extract_many(&config, &actors, &sk());
        assert_eq!(results.len(), 2);
        assert_eq!(results[0].0, "jane roe");
        assert_eq!(results[1].0, "john doe");
        assert_eq!(
            results[0].1.as_ref().unwrap().keyword.as_deref(),
            Some("quantum")
        );
        assert_eq!(results[1].1.as_ref().unwrap().keyword, None);
    }

    #[test]
    fn missing_fixture_files_are_data_errors() {
        let dir = tempfile::tempdir().unwrap();
        let config = fixture_config(dir.path());
        let err = extract(&config, "jane roe", &sk()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn explain_dumps_the_forest() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let config = fixture_config(dir.path());
        let (output, forest) = explain(&config, "jane roe").unwrap();
        assert_eq!(output.candidates.len(), 7);
        assert_eq!(output.clusters.len(), 1);
        assert_eq!(output.forest.edges.iter().filter(|e| e.kept).count(), 6);
        assert!(forest.is_valid());
    }

    #[test]
    fn provenance_digests_the_fixture_files() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture(dir.path());
        let config = fixture_config(dir.path());
        let p = provenance(&config, &[]);
        assert_eq!(p.config_hash, config.config_hash());
        assert_eq!(p.inputs.len(), 2);
        for (path, digest) in &p.inputs {
            assert!(path.ends_with("snippets.jsonl") || path.ends_with("hits.json"));
            assert!(digest.starts_with("sha256:"));
            assert_eq!(digest.len(), "sha256:".len() + 64);
        }
        let again = provenance(&config, &[]);
        assert_eq!(p, again);
    }
}
