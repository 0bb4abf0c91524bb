//! Stable attributes, cluster selection, and keyword ranking.
//!
//! A stable attribute is a hand-maintained word list describing the facet
//! of life an actor is searched under (academic, political, ...). The
//! micro cluster closest to that list is assumed to describe the actor;
//! within it, each word is scored delta = v - u, preferring words that are
//! heavily weighted in the actor's snippets yet uncommon on the web at
//! large. The top word becomes the discriminating keyword.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cooccur::{jaccard, HitCounter, UVector};
use crate::corpus::{load_wordlist, ActorRef};
use crate::error::{Error, Result};
use crate::graph::WordForest;
use crate::weighting::CandidateSet;

/// A named word list marking one stable facet of an actor's public life.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableAttribute {
    pub name: String,
    words: BTreeSet<String>,
}

impl StableAttribute {
    pub fn new(name: &str, words: BTreeSet<String>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Config(format!(
                "stable attribute {name:?} contains no words"
            )));
        }
        Ok(StableAttribute { name: name.to_string(), words })
    }

    /// Loads a word list: one entry per line, `#` comments and blank lines
    /// ignored, entries normalized through the snippet tokenizer.
    pub fn from_file(path: &Path) -> Result<Self> {
        let words = load_wordlist(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "attribute".to_string());
        StableAttribute::new(&name, words)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

/// How cluster-to-attribute proximity is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum ProximityMode {
    /// Fraction of cluster words that appear in the attribute list.
    #[serde(rename = "overlap-count")]
    #[value(name = "overlap-count")]
    OverlapCount,
    /// Mean over cluster words of the best hit-count Jaccard against any
    /// attribute word. Needs a hit provider.
    #[serde(rename = "jaccard")]
    #[value(name = "jaccard")]
    Jaccard,
}

/// Proximity of one cluster to the stable attribute, in [0, 1].
pub fn score_cluster(
    cluster: &[String],
    sk: &StableAttribute,
    counter: Option<&HitCounter>,
    mode: ProximityMode,
) -> Result<f64> {
    let members: BTreeSet<&str> = cluster.iter().map(String::as_str).collect();
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    match mode {
        ProximityMode::OverlapCount => {
            let hits = members.iter().filter(|w| sk.contains(w)).count();
            Ok(hits as f64 / members.len() as f64)
        }
        ProximityMode::Jaccard => {
            let counter = counter.ok_or_else(|| {
                Error::Config("jaccard proximity requires a hit provider".into())
            })?;
            let mut sum = 0.0;
            for word in &members {
                let hw = counter.hit_count(word)?;
                let mut best = 0.0_f64;
                for attr in sk.words() {
                    let ha = counter.hit_count(attr)?;
                    let hwa = counter.co_hit_count(word, attr)?;
                    best = best.max(jaccard(hw, ha, hwa));
                }
                sum += best;
            }
            Ok(sum / members.len() as f64)
        }
    }
}

/// Picks the tree whose word set lies closest to the stable attribute.
/// Ties fall to the cluster with the larger sum of member v weights, then
/// to the one with the lexicographically smallest first member.
pub fn select_cluster(
    forest: &WordForest,
    sk: &StableAttribute,
    candidates: &CandidateSet,
    counter: Option<&HitCounter>,
    mode: ProximityMode,
) -> Result<Vec<String>> {
    if forest.trees.is_empty() {
        return Err(Error::NoCluster {
            label: candidates.actor.canonical_name.clone(),
            reason: "the word forest is empty".into(),
        });
    }
    let mut best: Option<(f64, f64, Vec<String>)> = None;
    for cluster in forest.clusters() {
        let score = score_cluster(&cluster, sk, counter, mode)?;
        let v_sum: f64 = cluster
            .iter()
            .map(|w| candidates.v_of(w).unwrap_or(0.0))
            .sum();
        let better = match &best {
            None => true,
            Some((s, v, _)) => {
                score > *s || (score == *s && v_sum > *v)
                // Clusters arrive ordered by first member, so keeping the
                // incumbent on a full tie realizes the final tie-break.
            }
        };
        if better {
            best = Some((score, v_sum, cluster));
        }
    }
    Ok(best.expect("non-empty forest yields a cluster").2)
}

/// One row of the delta ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWord {
    pub word: String,
    pub v: f64,
    pub u: f64,
    pub delta: f64,
}

/// The keyword decision for one actor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordResult {
    pub actor: ActorRef,
    pub chosen_cluster: Vec<String>,
    pub ranking: Vec<RankedWord>,
    pub keyword: String,
    pub rewritten_query: String,
    pub warnings: Vec<String>,
}

/// Ranks the cluster by delta = v - u (descending; ties prefer higher v,
/// then word order) and takes the top word as keyword. A keyword whose
/// delta is negative is still returned, flagged with a warning.
pub fn pick_keyword(cluster: &[String], v: &CandidateSet, u: &UVector) -> Result<KeywordResult> {
    let members: BTreeSet<&str> = cluster.iter().map(String::as_str).collect();
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let mut ranking = Vec::with_capacity(members.len());
    for word in &members {
        let weight = v.v_of(word).ok_or_else(|| {
            Error::Config(format!("cluster word {word:?} is not a candidate"))
        })?;
        let commonness = u.get(word).ok_or_else(|| {
            Error::Config(format!("no u entry for cluster word {word:?}"))
        })?;
        ranking.push(RankedWord {
            word: word.to_string(),
            v: weight,
            u: commonness,
            delta: weight - commonness,
        });
    }
    ranking.sort_by(|a, b| {
        b.delta
            .total_cmp(&a.delta)
            .then_with(|| b.v.total_cmp(&a.v))
            .then_with(|| a.word.cmp(&b.word))
    });
    let top = &ranking[0];
    let mut warnings = Vec::new();
    if top.delta < 0.0 {
        warnings.push(format!(
            "every delta in the chosen cluster is negative (best is {:.5} for {:?})",
            top.delta, top.word
        ));
    }
    let keyword = top.word.clone();
    let rewritten_query = rewrite_query(&v.actor, &keyword);
    Ok(KeywordResult {
        actor: v.actor.clone(),
        chosen_cluster: members.iter().map(|w| w.to_string()).collect(),
        ranking,
        keyword,
        rewritten_query,
        warnings,
    })
}

/// The disambiguated query: the actor's name and the keyword, each as a
/// quoted phrase.
pub fn rewrite_query(actor: &ActorRef, keyword: &str) -> String {
    format!("\"{}\" \"{}\"", actor.canonical_name, keyword)
}
