//! Adapters that talk to a live search endpoint over HTTP.
//!
//! The endpoint exposes two JSON routes:
//! `GET {base}/search?q=<query>&offset=<n>&limit=<n>` returning
//! `{"results": [{"rank": <n>, "text": "..."}]}`, and
//! `GET {base}/count?q=<query>` returning `{"count": <n>}`.
//! A 429 response means the daily query budget is exhausted; runs abort
//! rather than continue with partial data.

use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;

use crate::cooccur::{canonical_doubleton_query, canonical_singleton_query, HitSource};
use crate::corpus::{ActorRef, CorpusOptions, Snippet, SnippetCorpus, SnippetProvider};
use crate::error::{Error, Result};

const HTTP_TIMEOUT: Duration = Duration::from_secs(30);
const SEARCH_PAGE_SIZE: usize = 50;

#[derive(Debug, Deserialize)]
struct SearchResponse {
    results: Vec<SearchResult>,
}

#[derive(Debug, Deserialize)]
struct SearchResult {
    rank: u32,
    text: String,
}

#[derive(Debug, Deserialize)]
struct CountResponse {
    count: u64,
}

/// Blocking HTTP client for the endpoint. Requests are serialized through a
/// mutex so concurrent pipeline workers cannot burst past rate limits.
pub struct LiveClient {
    base: String,
    http: reqwest::blocking::Client,
    gate: Mutex<()>,
}

impl LiveClient {
    pub fn new(base: &str) -> Result<Self> {
        let base = base.trim_end_matches('/').to_string();
        if base.is_empty() {
            return Err(Error::Config("endpoint base URL is empty".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(HTTP_TIMEOUT)
            .build()
            .map_err(|e| Error::Transport(format!("building HTTP client: {e}")))?;
        Ok(LiveClient {
            base,
            http,
            gate: Mutex::new(()),
        })
    }

    fn get_json<T: serde::de::DeserializeOwned>(
        &self,
        route: &str,
        params: &[(&str, String)],
    ) -> Result<T> {
        let _serial = self.gate.lock().expect("endpoint gate poisoned");
        let url = format!("{}/{}", self.base, route);
        let response = self
            .http
            .get(&url)
            .query(params)
            .send()
            .map_err(|e| Error::Transport(format!("GET {url}: {e}")))?;
        let status = response.status();
        if status.as_u16() == 429 {
            return Err(Error::Budget(format!(
                "endpoint refused {route} query: daily budget exhausted"
            )));
        }
        if !status.is_success() {
            return Err(Error::Transport(format!("GET {url}: HTTP {status}")));
        }
        response
            .json::<T>()
            .map_err(|e| Error::Transport(format!("decoding {route} response: {e}")))
    }
}

/// Fetches ranked snippets from the live endpoint, one page at a time.
pub struct LiveSnippetProvider {
    client: LiveClient,
    options: CorpusOptions,
}

impl LiveSnippetProvider {
    pub fn new(endpoint: &str, options: CorpusOptions) -> Result<Self> {
        Ok(LiveSnippetProvider {
            client: LiveClient::new(endpoint)?,
            options,
        })
    }
}

impl SnippetProvider for LiveSnippetProvider {
    fn fetch(&self, term: &str, limit: usize) -> Result<SnippetCorpus> {
        let mut snippets: Vec<Snippet> = Vec::new();
        let mut offset = 0usize;
        while snippets.len() < limit {
            let page: SearchResponse = self.client.get_json(
                "search",
                &[
                    ("q", term.to_string()),
                    ("offset", offset.to_string()),
                    ("limit", SEARCH_PAGE_SIZE.to_string()),
                ],
            )?;
            let received = page.results.len();
            for item in page.results {
                if snippets.len() >= limit {
                    break;
                }
                if let Some(snippet) = Snippet::from_raw(
                    term,
                    item.rank,
                    &item.text,
                    self.options.max_snippet_len,
                    self.options.stopwords.as_ref(),
                )? {
                    snippets.push(snippet);
                }
            }
            if received < SEARCH_PAGE_SIZE {
                break;
            }
            offset += received;
        }
        let mut corpus = SnippetCorpus::new(ActorRef::new(term)?, snippets);
        corpus.retrieved_at = Some(chrono::Utc::now().to_rfc3339());
        Ok(corpus)
    }
}

/// Resolves hit counts through the live endpoint's `count` route.
pub struct LiveHitSource {
    client: LiveClient,
}

impl LiveHitSource {
    pub fn new(endpoint: &str) -> Result<Self> {
        Ok(LiveHitSource {
            client: LiveClient::new(endpoint)?,
        })
    }
}

impl HitSource for LiveHitSource {
    fn singleton(&self, term: &str) -> Result<u64> {
        let response: CountResponse = self
            .client
            .get_json("count", &[("q", canonical_singleton_query(term))])?;
        Ok(response.count)
    }

    fn doubleton(&self, a: &str, b: &str) -> Result<u64> {
        let response: CountResponse = self
            .client
            .get_json("count", &[("q", canonical_doubleton_query(a, b))])?;
        Ok(response.count)
    }
}
