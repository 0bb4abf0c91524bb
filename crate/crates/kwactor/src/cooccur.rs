//! Hit counts, co-occurrence queries, and the u vector.
//!
//! A word's hit count approximates how common it is on the web overall;
//! a doubleton count approximates how often two words occur together.
//! Every count flows through [`HitCounter`], which memoizes by canonical
//! query string so that building all pairwise similarities over n words
//! costs at most n(n-1)/2 doubleton queries plus n singleton queries.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical phrase query for one term: the term wrapped in quotes.
pub fn canonical_singleton_query(term: &str) -> String {
    format!("\"{term}\"")
}

/// Canonical conjunction query for a pair, lexicographically ordered so
/// that (x, y) and (y, x) share one cache entry.
pub fn canonical_doubleton_query(a: &str, b: &str) -> String {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    format!("\"{lo}\" AND \"{hi}\"")
}

/// Memo table of singleton and doubleton counts plus a query ledger.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HitCountTable {
    singleton: BTreeMap<String, u64>,
    doubleton: BTreeMap<(String, String), u64>,
    queries_issued: u64,
}

impl HitCountTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a previously written cache file. Doubleton entries are clamped
    /// against their singletons where those are present, so the table
    /// invariant holds even for hand-edited fixtures.
    pub fn from_cache_file(path: &Path) -> Result<Self> {
        let data = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let raw: BTreeMap<String, u64> = serde_json::from_str(&data).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        let mut table = HitCountTable::new();
        for (key, count) in &raw {
            match parse_canonical_query(key) {
                Some((term, None)) => {
                    table.singleton.insert(term, *count);
                }
                Some((a, Some(b))) => {
                    table.doubleton.insert((a, b), *count);
                }
                None => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: 0,
                        message: format!("unrecognized cache key {key:?}"),
                    });
                }
            }
        }
        let singles = table.singleton.clone();
        for ((a, b), count) in table.doubleton.iter_mut() {
            if let (Some(ha), Some(hb)) = (singles.get(a), singles.get(b)) {
                *count = (*count).min(*ha).min(*hb);
            }
        }
        Ok(table)
    }

    pub fn queries_issued(&self) -> u64 {
        self.queries_issued
    }

    pub fn singleton_entries(&self) -> &BTreeMap<String, u64> {
        &self.singleton
    }

    pub fn doubleton_entries(&self) -> &BTreeMap<(String, String), u64> {
        &self.doubleton
    }

    /// Flattens the table to canonical-query keys, the cache file format.
    pub fn to_cache_map(&self) -> BTreeMap<String, u64> {
        let mut map = BTreeMap::new();
        for (term, count) in &self.singleton {
            map.insert(canonical_singleton_query(term), *count);
        }
        for ((a, b), count) in &self.doubleton {
            map.insert(canonical_doubleton_query(a, b), *count);
        }
        map
    }
}

fn parse_canonical_query(key: &str) -> Option<(String, Option<String>)> {
    fn unquote(s: &str) -> Option<&str> {
        let inner = s.strip_prefix('"')?.strip_suffix('"')?;
        if inner.contains('"') {
            None
        } else {
            Some(inner)
        }
    }
    if let Some((left, right)) = key.split_once(" AND ") {
        let a = unquote(left)?;
        let b = unquote(right)?;
        if a > b {
            return None;
        }
        Some((a.to_string(), Some(b.to_string())))
    } else {
        unquote(key).map(|t| (t.to_string(), None))
    }
}

/// Raw, un-memoized source of hit counts. Implementations may return
/// inconsistent doubletons; [`HitCounter`] clamps them at ingestion.
pub trait HitSource: Send + Sync {
    fn singleton(&self, term: &str) -> Result<u64>;
    fn doubleton(&self, a: &str, b: &str) -> Result<u64>;
}

/// Cache-file-backed source. A lookup that is not in the file is an error
/// naming the exact query, so fixtures can be completed.
pub struct OfflineHitSource {
    counts: BTreeMap<String, u64>,
}

impl OfflineHitSource {
    pub fn from_file(path: &Path) -> Result<Self> {
        let data = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let counts = serde_json::from_str(&data).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        Ok(OfflineHitSource { counts })
    }

    pub fn from_map(counts: BTreeMap<String, u64>) -> Self {
        OfflineHitSource { counts }
    }

    fn lookup(&self, query: &str) -> Result<u64> {
        self.counts
            .get(query)
            .copied()
            .ok_or_else(|| Error::MissingCount { query: query.to_string() })
    }
}

impl HitSource for OfflineHitSource {
    fn singleton(&self, term: &str) -> Result<u64> {
        self.lookup(&canonical_singleton_query(term))
    }

    fn doubleton(&self, a: &str, b: &str) -> Result<u64> {
        self.lookup(&canonical_doubleton_query(a, b))
    }
}

/// Memoizing front for a [`HitSource`]. Internally synchronized; concurrent
/// lookups are safe and each distinct query is issued at most once.
pub struct HitCounter {
    source: Box<dyn HitSource>,
    table: Mutex<HitCountTable>,
}

impl HitCounter {
    pub fn new(source: Box<dyn HitSource>) -> Self {
        Self::with_table(source, HitCountTable::new())
    }

    /// Starts from a pre-populated table (a warmed cache). Seeded entries
    /// do not count toward `queries_issued`.
    pub fn with_table(source: Box<dyn HitSource>, table: HitCountTable) -> Self {
        HitCounter { source, table: Mutex::new(table) }
    }

    /// Hit count for a single term.
    pub fn hit_count(&self, term: &str) -> Result<u64> {
        let mut table = self.table.lock().unwrap();
        if let Some(count) = table.singleton.get(term) {
            return Ok(*count);
        }
        let count = self.source.singleton(term)?;
        table.queries_issued += 1;
        table.singleton.insert(term.to_string(), count);
        Ok(count)
    }

    /// Co-occurrence count for a pair, symmetric in its arguments and
    /// clamped so it never exceeds either singleton count.
    pub fn co_hit_count(&self, a: &str, b: &str) -> Result<u64> {
        if a == b {
            return self.hit_count(a);
        }
        let ha = self.hit_count(a)?;
        let hb = self.hit_count(b)?;
        let key = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        let mut table = self.table.lock().unwrap();
        if let Some(count) = table.doubleton.get(&key) {
            return Ok(*count);
        }
        let raw = self.source.doubleton(&key.0, &key.1)?;
        let clamped = raw.min(ha).min(hb);
        table.queries_issued += 1;
        table.doubleton.insert(key, clamped);
        Ok(clamped)
    }

    pub fn queries_issued(&self) -> u64 {
        self.table.lock().unwrap().queries_issued
    }

    pub fn snapshot(&self) -> HitCountTable {
        self.table.lock().unwrap().clone()
    }

    /// Persists the memo table in cache-file format. The write is atomic
    /// (temp file in the same directory, then rename), so an interrupted
    /// run never leaves a corrupt cache behind.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let map = self.snapshot().to_cache_map();
        let mut body = serde_json::to_string_pretty(&map).expect("count map serializes");
        body.push('\n');
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let io_err = |source| Error::Io { path: path.to_path_buf(), source };
        fs::write(&tmp, body).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)?;
        Ok(())
    }
}

/// Hit-count Jaccard: intersection over union of the two result sets.
/// Zero whenever the pair never co-occurs, including the degenerate case
/// of two zero-hit words.
pub fn jaccard(hx: u64, hy: u64, hxy: u64) -> f64 {
    debug_assert!(hxy <= hx.min(hy), "doubleton exceeds a singleton");
    if hxy == 0 {
        return 0.0;
    }
    hxy as f64 / (hx + hy - hxy) as f64
}

/// How the commonness vector u is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum UMode {
    /// u_i = hits(w_i) / max_j hits(w_j).
    #[serde(rename = "singleton")]
    #[value(name = "singleton")]
    Singleton,
    /// u_i = hits(actor AND w_i) / max_j hits(actor AND w_j).
    #[serde(rename = "doubleton-with-actor")]
    #[value(name = "doubleton-with-actor")]
    DoubletonWithActor,
}

/// Normalized commonness per word, each entry in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UVector {
    entries: BTreeMap<String, f64>,
}

impl UVector {
    pub fn from_entries(entries: BTreeMap<String, f64>) -> Result<Self> {
        for (word, u) in &entries {
            if !(0.0..=1.0).contains(u) {
                return Err(Error::Config(format!("u({word:?}) = {u} outside [0, 1]")));
            }
        }
        Ok(UVector { entries })
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.entries.get(word).copied()
    }

    pub fn entries(&self) -> &BTreeMap<String, f64> {
        &self.entries
    }
}

/// Builds the u vector for `words`. In doubleton mode the counts are
/// co-occurrences with `actor_term`, which must then be supplied. When every
/// count is zero the vector is all zeros; otherwise its maximum is 1.
pub fn u_vector(
    words: &[String],
    counter: &HitCounter,
    mode: UMode,
    actor_term: Option<&str>,
) -> Result<UVector> {
    let mut raw: BTreeMap<String, u64> = BTreeMap::new();
    for word in words {
        let count = match mode {
            UMode::Singleton => counter.hit_count(word)?,
            UMode::DoubletonWithActor => {
                let actor = actor_term.ok_or_else(|| {
                    Error::Config("doubleton-with-actor u mode requires an actor term".into())
                })?;
                counter.co_hit_count(actor, word)?
            }
        };
        raw.insert(word.clone(), count);
    }
    let max = raw.values().copied().max().unwrap_or(0);
    let entries = raw
        .into_iter()
        .map(|(word, count)| {
            let u = if max == 0 { 0.0 } else { count as f64 / max as f64 };
            (word, u)
        })
        .collect();
    Ok(UVector { entries })
}
