//! Duplicate-question recommender for course forums.
//!
//! The crate is organized bottom-up:
//!
//! * [`corpus`] loads and validates forum posts from JSON Lines files.
//! * [`textpipe`] turns raw text into stemmed token streams.
//! * [`vectorspace`] fits TF-IDF models and answers cosine top-k queries.
//! * [`ensemble`] combines four per-field models into draft recommendations.
//! * [`feeds`] ranks the student and instructor home feeds.
//! * [`evalkit`] holds the offline measurement tools (walk-forward recall,
//!   duplicate rates, rater agreement, proportion tests).
//! * [`synth`] generates seeded synthetic corpora for tests and benchmarks.

use std::path::PathBuf;

pub mod corpus;
pub mod ensemble;
pub mod evalkit;
pub mod feeds;
pub mod synth;
pub mod textpipe;
pub mod vectorspace;

pub use corpus::{load_corpus, ClassCorpus, Followup, Post};
pub use ensemble::{DraftQuestion, EnsembleModel, FieldKind, PerField, Recommendation, Weights};
pub use textpipe::{preprocess, stem, tokenize, TokenStream};
pub use vectorspace::{cosine, SparseVector, TfidfModel};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    NotFound(PathBuf),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unparseable timestamp: {message}")]
    Timestamp { line: usize, message: String },
    #[error("duplicate post id {0:?}")]
    DuplicateId(String),
    #[error("post {id:?} has class {found:?}, expected {expected:?}")]
    MixedClass {
        expected: String,
        found: String,
        id: String,
    },
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("draft question is empty")]
    EmptyDraft,
    #[error("invalid model artifact: {0}")]
    Artifact(String),
    #[error("invalid gold clustering: {0}")]
    Gold(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
