//! Forum data model and JSON Lines corpus loading.
//!
//! A corpus file holds one post per line. Loading validates every record,
//! rejects duplicate ids and sorts the posts chronologically. The loaded
//! [`ClassCorpus`] is immutable and can be shared freely between readers.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A follow-up discussion attached to a post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Followup {
    pub text: String,
    /// Unlabelled discussions count as unresolved.
    #[serde(default)]
    pub resolved: bool,
    #[serde(default)]
    pub contributions: Vec<String>,
}

/// A forum question together with its answers and follow-ups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub class_id: String,
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub tags: Vec<String>,
    #[serde(with = "timestamp")]
    pub created_at: DateTime<Utc>,
    #[serde(default)]
    pub views: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instructor_answer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub student_answer: Option<String>,
    #[serde(default)]
    pub followups: Vec<Followup>,
}

impl Post {
    /// Number of follow-ups not marked as resolved.
    pub fn unresolved_followup_count(&self) -> usize {
        unresolved_followup_count(self)
    }

    pub fn has_instructor_answer(&self) -> bool {
        self.instructor_answer.is_some()
    }

    pub fn has_student_answer(&self) -> bool {
        self.student_answer.is_some()
    }
}

/// Number of follow-ups on `post` with `resolved == false`.
pub fn unresolved_followup_count(post: &Post) -> usize {
    post.followups.iter().filter(|f| !f.resolved).count()
}

/// All posts of one class, ordered by creation time.
#[derive(Debug, Clone)]
pub struct ClassCorpus {
    class_id: String,
    posts: Vec<Post>,
    loaded_at: DateTime<Utc>,
}

impl ClassCorpus {
    /// Builds a corpus from in-memory posts, enforcing the same rules as
    /// [`load_corpus`]: unique ids, a single class id, chronological order.
    ///
    /// `class_id` is only consulted when `posts` is empty; otherwise the
    /// posts' own class id is used and must be shared by all of them.
    pub fn from_posts(class_id: impl Into<String>, mut posts: Vec<Post>) -> Result<Self> {
        let mut class_id = class_id.into();
        if let Some(first) = posts.first() {
            class_id = first.class_id.clone();
        }
        let mut seen = HashSet::with_capacity(posts.len());
        for post in &posts {
            if post.class_id != class_id {
                return Err(Error::MixedClass {
                    expected: class_id,
                    found: post.class_id.clone(),
                    id: post.id.clone(),
                });
            }
            if !seen.insert(post.id.as_str()) {
                return Err(Error::DuplicateId(post.id.clone()));
            }
        }
        // stable: records with equal timestamps keep file order
        posts.sort_by_key(|p| p.created_at);
        Ok(Self {
            class_id,
            posts,
            loaded_at: Utc::now(),
        })
    }

    pub fn class_id(&self) -> &str {
        &self.class_id
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn loaded_at(&self) -> DateTime<Utc> {
        self.loaded_at
    }

    pub fn get(&self, id: &str) -> Option<&Post> {
        self.posts.iter().find(|p| p.id == id)
    }

    /// Corpus restricted to the first `n` posts in chronological order.
    pub fn prefix(&self, n: usize) -> ClassCorpus {
        ClassCorpus {
            class_id: self.class_id.clone(),
            posts: self.posts[..n.min(self.posts.len())].to_vec(),
            loaded_at: self.loaded_at,
        }
    }

    /// Writes the corpus back out as JSON Lines.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for post in &self.posts {
            serde_json::to_writer(&mut out, post)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        let mut out = std::io::BufWriter::new(file);
        self.write_jsonl(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

// `loaded_at` is bookkeeping, not content.
impl PartialEq for ClassCorpus {
    fn eq(&self, other: &Self) -> bool {
        self.class_id == other.class_id && self.posts == other.posts
    }
}

/// Loads a JSON Lines corpus file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<ClassCorpus> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(PathBuf::from(path)),
        _ => Error::Io(e),
    })?;
    read_corpus(file)
}

/// Parses a JSON Lines corpus from any reader. Blank lines are skipped.
pub fn read_corpus<R: Read>(reader: R) -> Result<ClassCorpus> {
    let mut posts = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        posts.push(parse_record(&line, idx + 1)?);
    }
    ClassCorpus::from_posts(String::new(), posts)
}

/// Parses a corpus held entirely in memory.
pub fn parse_corpus(bytes: &[u8]) -> Result<ClassCorpus> {
    read_corpus(bytes)
}

fn parse_record(line: &str, line_no: usize) -> Result<Post> {
    serde_json::from_str::<Post>(line).map_err(|e| {
        let message = e.to_string();
        if message.contains(timestamp::INVALID) {
            Error::Timestamp {
                line: line_no,
                message,
            }
        } else {
            Error::Malformed {
                line: line_no,
                message,
            }
        }
    })
}

/// ISO-8601 timestamps with any offset, normalized to UTC.
pub(crate) mod timestamp {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub(crate) const INVALID: &str = "invalid timestamp";

    pub fn parse(raw: &str) -> Option<DateTime<Utc>> {
        DateTime::parse_from_rfc3339(raw)
            .map(|t| t.with_timezone(&Utc))
            .ok()
            .or_else(|| {
                // naive timestamps are taken as UTC
                chrono::NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f")
                    .ok()
                    .map(|n| n.and_utc())
            })
    }

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&t.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).ok_or_else(|| serde::de::Error::custom(format!("{INVALID} {raw:?}")))
    }
}

pub use timestamp::parse as parse_timestamp;
