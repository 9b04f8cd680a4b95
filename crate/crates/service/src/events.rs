//! Client telemetry events and their append-only JSON Lines log.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventType {
    NewPostClick,
    RecommendationClick,
    SubmitPostClick,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventRecord {
    pub event_type: EventType,
    pub class_id: String,
    /// Opaque client identifier; stored, never interpreted.
    pub user_token: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_id: Option<String>,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EventError {
    #[error("malformed event: {0}")]
    Malformed(String),
    #[error("recommendation_click requires post_id")]
    MissingPostId,
    #[error("{0:?} events must not carry post_id")]
    UnexpectedPostId(EventType),
}

impl EventError {
    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            EventError::Malformed(_) => "malformed_event",
            EventError::MissingPostId => "missing_post_id",
            EventError::UnexpectedPostId(_) => "unexpected_post_id",
        }
    }
}

impl EventRecord {
    pub fn validate(&self) -> Result<(), EventError> {
        match (self.event_type, &self.post_id) {
            (EventType::RecommendationClick, None) => Err(EventError::MissingPostId),
            (EventType::RecommendationClick, Some(_)) => Ok(()),
            (other, Some(_)) => Err(EventError::UnexpectedPostId(other)),
            (_, None) => Ok(()),
        }
    }

    /// Decodes and validates one event from JSON.
    pub fn parse(bytes: &[u8]) -> Result<Self, EventError> {
        let event: EventRecord =
            serde_json::from_slice(bytes).map_err(|e| EventError::Malformed(e.to_string()))?;
        event.validate()?;
        Ok(event)
    }
}

/// Append-only event log. Appends are serialized and synced to disk before
/// [`EventLog::append`] returns, so acknowledgment order is file order.
#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl EventLog {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref().to_owned();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, event: &EventRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_vec(event)?;
        line.push(b'\n');
        // a poisoned lock only means another append panicked mid-write; the
        // file handle itself is still usable
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(&line)?;
        file.sync_data()
    }
}
