//! Per-class model snapshots and the retrain cycle.
//!
//! Each class owns one `Arc<Snapshot>` behind a lock that is held only long
//! enough to clone or replace the pointer. Readers keep their clone for the
//! whole request, so a retrain that swaps in a new snapshot never affects a
//! query already in flight.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use chrono::{DateTime, Utc};
use dupwatch_core::{load_corpus, ClassCorpus, EnsembleModel, Weights};
use serde::Serialize;

/// An immutable, fully trained view of one class.
#[derive(Debug)]
pub struct Snapshot {
    pub corpus: ClassCorpus,
    pub model: EnsembleModel,
}

impl Snapshot {
    pub fn build(corpus: ClassCorpus, weights: Weights) -> Self {
        let model = EnsembleModel::fit(&corpus, weights);
        Self { corpus, model }
    }

    pub fn trained_at(&self) -> DateTime<Utc> {
        self.model.trained_at()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassHealth {
    pub class_id: String,
    pub trained_at: DateTime<Utc>,
    pub n_posts: usize,
    /// True when the most recent retrain failed and an older snapshot serves.
    pub stale: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_error: Option<String>,
}

#[derive(Debug)]
struct ClassSlot {
    corpus_path: PathBuf,
    current: RwLock<Arc<Snapshot>>,
    last_error: Mutex<Option<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum RetrainError {
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("class {class_id:?}: {source}")]
    Load {
        class_id: String,
        source: dupwatch_core::Error,
    },
    #[error("class {expected:?}: corpus file holds class {found:?}")]
    WrongClass { expected: String, found: String },
}

/// All registered classes.
#[derive(Debug)]
pub struct Registry {
    weights: Weights,
    classes: BTreeMap<String, ClassSlot>,
    // one retrain at a time, across all classes
    retrain_lock: Mutex<()>,
}

impl Registry {
    /// Loads and trains every class. Fails if any corpus cannot be loaded.
    pub fn load(
        corpus_paths: &BTreeMap<String, PathBuf>,
        weights: Weights,
    ) -> Result<Self, RetrainError> {
        let mut classes = BTreeMap::new();
        for (class_id, path) in corpus_paths {
            let corpus = read_class(class_id, path)?;
            let snapshot = Snapshot::build(corpus, weights);
            classes.insert(
                class_id.clone(),
                ClassSlot {
                    corpus_path: path.clone(),
                    current: RwLock::new(Arc::new(snapshot)),
                    last_error: Mutex::new(None),
                },
            );
        }
        Ok(Self {
            weights,
            classes,
            retrain_lock: Mutex::new(()),
        })
    }

    pub fn class_ids(&self) -> impl Iterator<Item = &str> {
        self.classes.keys().map(String::as_str)
    }

    pub fn contains(&self, class_id: &str) -> bool {
        self.classes.contains_key(class_id)
    }

    /// The active snapshot of `class_id`.
    pub fn snapshot(&self, class_id: &str) -> Option<Arc<Snapshot>> {
        let slot = self.classes.get(class_id)?;
        let guard = slot.current.read().unwrap_or_else(|e| e.into_inner());
        Some(Arc::clone(&guard))
    }

    /// Reloads the corpus file of `class_id`, refits, and swaps the result in.
    ///
    /// On failure the previous snapshot keeps serving and the error is kept
    /// for the health report.
    pub fn retrain_tick(&self, class_id: &str) -> Result<Arc<Snapshot>, RetrainError> {
        let slot = self
            .classes
            .get(class_id)
            .ok_or_else(|| RetrainError::UnknownClass(class_id.to_owned()))?;
        let _serial = self.retrain_lock.lock().unwrap_or_else(|e| e.into_inner());
        let result = read_class(class_id, &slot.corpus_path)
            .map(|corpus| Arc::new(Snapshot::build(corpus, self.weights)));
        let mut last_error = slot.last_error.lock().unwrap_or_else(|e| e.into_inner());
        match result {
            Ok(snapshot) => {
                *slot.current.write().unwrap_or_else(|e| e.into_inner()) = Arc::clone(&snapshot);
                *last_error = None;
                tracing::info!(
                    class_id,
                    n_posts = snapshot.corpus.len(),
                    trained_at = %snapshot.trained_at(),
                    "retrained"
                );
                Ok(snapshot)
            }
            Err(e) => {
                tracing::warn!(class_id, error = %e, "retrain failed; keeping previous snapshot");
                *last_error = Some(e.to_string());
                Err(e)
            }
        }
    }

    /// Retrains every class in turn, logging failures.
    pub fn retrain_all(&self) {
        for class_id in self.classes.keys() {
            let _ = self.retrain_tick(class_id);
        }
    }

    pub fn health(&self) -> Vec<ClassHealth> {
        self.classes
            .iter()
            .map(|(class_id, slot)| {
                let snap = Arc::clone(&slot.current.read().unwrap_or_else(|e| e.into_inner()));
                let last_error = slot
                    .last_error
                    .lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .clone();
                ClassHealth {
                    class_id: class_id.clone(),
                    trained_at: snap.trained_at(),
                    n_posts: snap.corpus.len(),
                    stale: last_error.is_some(),
                    last_error,
                }
            })
            .collect()
    }
}

fn read_class(class_id: &str, path: &Path) -> Result<ClassCorpus, RetrainError> {
    let corpus = load_corpus(path).map_err(|source| RetrainError::Load {
        class_id: class_id.to_owned(),
        source,
    })?;
    // an empty file carries no class id of its own
    if !corpus.is_empty() && corpus.class_id() != class_id {
        return Err(RetrainError::WrongClass {
            expected: class_id.to_owned(),
            found: corpus.class_id().to_owned(),
        });
    }
    if corpus.is_empty() {
        return Ok(ClassCorpus::from_posts(class_id, Vec::new()).expect("empty corpus is valid"));
    }
    Ok(corpus)
}

/// Runs [`Registry::retrain_all`] every `interval` on the blocking pool until
/// the returned handle is aborted.
pub fn spawn_scheduler(registry: Arc<Registry>, interval: Duration) -> tokio::task::JoinHandle<()> {
    tokio::spawn(async move {
        let mut ticker = tokio::time::interval(interval);
        ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
        // the first tick fires immediately; startup already trained everything
        ticker.tick().await;
        loop {
            ticker.tick().await;
            let registry = Arc::clone(&registry);
            if let Err(e) = tokio::task::spawn_blocking(move || registry.retrain_all()).await {
                tracing::error!(error = %e, "retrain task panicked");
            }
        }
    })
}
