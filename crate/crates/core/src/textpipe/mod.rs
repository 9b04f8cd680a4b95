//! Text normalization: tokenization, stopword removal and stemming.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

mod stem;

pub use stem::stem;

static STOPWORDS_RAW: &str = include_str!("../../data/stopwords_en.txt");

/// The vendored English stopword list.
pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_RAW
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Minimum token length in characters.
pub const MIN_TOKEN_LEN: usize = 2;

/// Ordered sequence of normalized tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenStream(Vec<String>);

impl TokenStream {
    pub fn new(tokens: Vec<String>) -> Self {
        Self(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for TokenStream {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

/// Splits `text` into maximal alphanumeric runs, lowercases them, and drops
/// runs shorter than two characters and stopwords.
pub fn tokenize(text: &str) -> TokenStream {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|run| !run.is_empty())
        // some lowercase mappings emit combining marks, and a few capitals
        // (mathematical alphanumerics) have no lowercase form; drop both
        .map(|run| {
            run.to_lowercase()
                .chars()
                .filter(|c| c.is_alphanumeric() && !c.is_uppercase())
                .collect::<String>()
        })
        .filter(|token| token.chars().count() >= MIN_TOKEN_LEN && !is_stopword(token))
        .collect()
}

/// [`tokenize`] followed by [`stem`] on every token.
pub fn preprocess(text: &str) -> TokenStream {
    tokenize(text)
        .into_tokens()
        .into_iter()
        .map(|t| stem(&t))
        .collect()
}
