//! Keyword extraction for named social actors.
//!
//! Many people share a name; a web search for the name alone mixes their
//! pages together. This crate finds, for one actor, the single word that
//! best tells their pages apart, and rewrites the query with it.
//!
//! The pipeline, module by module:
//!
//! 1. [`corpus`]: fetch and tokenize the result snippets for the actor's
//!    name.
//! 2. [`weighting`]: score every snippet word by TF.IDF, normalize, keep
//!    the heavy ones as candidates.
//! 3. [`cooccur`]: look up web hit counts for candidates and their pairs;
//!    derive pairwise Jaccard similarities and the commonness vector u.
//! 4. [`graph`]: build the similarity graph, take its maximum spanning
//!    forest, and split it into micro clusters by bounding node degrees.
//! 5. [`selection`]: pick the cluster closest to a stable attribute of the
//!    actor (a hand-maintained facet word list), rank its words by
//!    delta = v - u, and rewrite the query with the winner.
//! 6. [`eval`]: precision/recall/f-measure scoring of retrieval judgments.
//!
//! [`pipeline`] wires these together behind one [`config::RunConfig`];
//! [`live`] holds the HTTP adapters used when fixtures are not enough.

#![forbid(unsafe_code)]

pub mod config;
pub mod cooccur;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod graph;
pub mod live;
pub mod pipeline;
pub mod selection;
pub mod weighting;

pub use config::RunConfig;
pub use error::{Error, Result};
