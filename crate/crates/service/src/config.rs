//! Service configuration: a TOML file, then `DW_*` environment overrides,
//! then command-line flags.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use dupwatch_core::ensemble::DEFAULT_K;
use dupwatch_core::feeds::{DEFAULT_AGE_CUTOFF_DAYS, DEFAULT_FEED_SIZE, DEFAULT_THETA_DAYS};
use dupwatch_core::{PerField, Weights};
use serde::{Deserialize, Serialize};

pub const ENV_PREFIX: &str = "DW_";
pub const DEFAULT_RETRAIN_INTERVAL_SECONDS: u64 = 900;
pub const DEFAULT_LISTEN_ADDRESS: &str = "127.0.0.1:8080";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub retrain_interval_seconds: u64,
    pub feed_size: usize,
    pub recommendation_k: usize,
    pub theta_days: f64,
    pub age_cutoff_days: f64,
    pub weights: PerField<f64>,
    pub listen_address: String,
    pub corpus_paths: BTreeMap<String, PathBuf>,
    pub event_log_path: PathBuf,
    /// Directory of static client assets served under `/ui`, if any.
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            retrain_interval_seconds: DEFAULT_RETRAIN_INTERVAL_SECONDS,
            feed_size: DEFAULT_FEED_SIZE,
            recommendation_k: DEFAULT_K,
            theta_days: DEFAULT_THETA_DAYS,
            age_cutoff_days: DEFAULT_AGE_CUTOFF_DAYS,
            weights: *Weights::default().as_per_field(),
            listen_address: DEFAULT_LISTEN_ADDRESS.to_owned(),
            corpus_paths: BTreeMap::new(),
            event_log_path: PathBuf::from("events.jsonl"),
            ui_dir: None,
        }
    }
}

impl ServiceConfig {
    /// Parses a TOML document. Relative paths are kept as written.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ServiceConfig = toml::from_str(text)?;
        Ok(config)
    }

    /// Reads `path` and resolves relative file paths against its directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_relative_to(base);
        }
        Ok(config)
    }

    fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpus_paths.values_mut().for_each(fix);
        fix(&mut self.event_log_path);
        if let Some(ui) = &mut self.ui_dir {
            fix(ui);
        }
    }

    /// Applies `DW_*` overrides from `vars`, typically `std::env::vars()`.
    ///
    /// Scalar keys map to their upper-cased name (`DW_FEED_SIZE`). Weights use
    /// `DW_WEIGHTS_<FIELD>` and corpora `DW_CORPUS_PATHS_<CLASS_ID>`, where the
    /// class id is taken verbatim after the prefix.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (key, value) in vars {
            let (key, value) = (key.as_ref(), value.as_ref());
            let Some(name) = key.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            match name {
                "RETRAIN_INTERVAL_SECONDS" => self.retrain_interval_seconds = parse(key, value)?,
                "FEED_SIZE" => self.feed_size = parse(key, value)?,
                "RECOMMENDATION_K" => self.recommendation_k = parse(key, value)?,
                "THETA_DAYS" => self.theta_days = parse(key, value)?,
                "AGE_CUTOFF_DAYS" => self.age_cutoff_days = parse(key, value)?,
                "LISTEN_ADDRESS" => self.listen_address = value.to_owned(),
                "EVENT_LOG_PATH" => self.event_log_path = value.into(),
                "UI_DIR" => self.ui_dir = Some(value.into()),
                "WEIGHTS_QUESTION_CONTENT" => self.weights.question_content = parse(key, value)?,
                "WEIGHTS_INSTRUCTOR_ANSWER" => self.weights.instructor_answer = parse(key, value)?,
                "WEIGHTS_STUDENT_ANSWER" => self.weights.student_answer = parse(key, value)?,
                "WEIGHTS_FOLLOWUPS" => self.weights.followups = parse(key, value)?,
                _ => match name.strip_prefix("CORPUS_PATHS_") {
                    Some(class) if !class.is_empty() => {
                        self.corpus_paths.insert(class.to_owned(), value.into());
                    }
                    // other DW_ variables may belong to tooling; ignore them
                    _ => {}
                },
            }
        }
        Ok(())
    }

    /// Checks every constraint the running service relies on.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.retrain_interval_seconds == 0 {
            return Err(invalid("retrain_interval_seconds", "must be positive"));
        }
        if self.feed_size == 0 {
            return Err(invalid("feed_size", "must be positive"));
        }
        if self.recommendation_k == 0 {
            return Err(invalid("recommendation_k", "must be positive"));
        }
        if !(self.theta_days.is_finite() && self.theta_days > 0.0) {
            return Err(invalid("theta_days", "must be a positive number"));
        }
        if !(self.age_cutoff_days.is_finite() && self.age_cutoff_days >= 0.0) {
            return Err(invalid("age_cutoff_days", "must be a non-negative number"));
        }
        Weights::new(self.weights).map_err(|e| invalid("weights", e.to_string()))?;
        self.socket_addr()?;
        if self.corpus_paths.is_empty() {
            return Err(invalid("corpus_paths", "at least one class is required"));
        }
        Ok(())
    }

    pub fn socket_addr(&self) -> Result<SocketAddr, ConfigError> {
        self.listen_address
            .parse()
            .map_err(|e| invalid("listen_address", format!("{e}")))
    }

    /// Validated ensemble weights.
    pub fn ensemble_weights(&self) -> Result<Weights, ConfigError> {
        Weights::new(self.weights).map_err(|e| invalid("weights", e.to_string()))
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| invalid(key, format!("{value:?}: {e}")))
}
