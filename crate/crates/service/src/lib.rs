//! HTTP service and command-line front end for the dupwatch recommender.
//!
//! One process hosts every class: [`state::Registry`] owns the per-class
//! snapshots and the retrain cycle, [`http`] answers requests from whatever
//! snapshot is current, and [`events::EventLog`] records client telemetry.

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub mod cli;
pub mod config;
pub mod events;
pub mod http;
pub mod state;

pub use config::ServiceConfig;
pub use events::{EventLog, EventRecord, EventType};
pub use state::{Registry, Snapshot};

/// A service bound to a socket and answering requests.
#[derive(Debug)]
pub struct RunningService {
    pub addr: SocketAddr,
    pub registry: Arc<Registry>,
    shutdown: Option<oneshot::Sender<()>>,
    server: JoinHandle<std::io::Result<()>>,
    scheduler: JoinHandle<()>,
}

impl RunningService {
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    /// Stops accepting connections, drains in-flight requests and halts the
    /// retrain scheduler.
    pub async fn stop(mut self) -> anyhow::Result<()> {
        self.scheduler.abort();
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        self.server.await??;
        Ok(())
    }

    /// Waits until the server exits on its own.
    pub async fn wait(self) -> anyhow::Result<()> {
        let result = self.server.await;
        self.scheduler.abort();
        result??;
        Ok(())
    }
}

/// Validates `config`, trains every class, binds the listener and starts the
/// retrain scheduler.
pub async fn start(config: ServiceConfig) -> anyhow::Result<RunningService> {
    config.validate()?;
    let weights = config.ensemble_weights()?;
    let paths = config.corpus_paths.clone();
    let registry = tokio::task::spawn_blocking(move || Registry::load(&paths, weights))
        .await?
        .context("loading class corpora")?;
    let registry = Arc::new(registry);
    let events = EventLog::open(&config.event_log_path)
        .with_context(|| format!("opening event log {}", config.event_log_path.display()))?;

    let state = Arc::new(http::AppState::new(Arc::clone(&registry), events, &config));
    let app = http::router(state, config.ui_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(config.socket_addr()?)
        .await
        .with_context(|| format!("binding {}", config.listen_address))?;
    let addr = listener.local_addr()?;

    let (tx, rx) = oneshot::channel::<()>();
    let server = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    let scheduler = state::spawn_scheduler(
        Arc::clone(&registry),
        Duration::from_secs(config.retrain_interval_seconds),
    );
    tracing::info!(%addr, classes = registry.class_ids().count(), "listening");
    Ok(RunningService {
        addr,
        registry,
        shutdown: Some(tx),
        server,
        scheduler,
    })
}

/// Runs until interrupted.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let service = start(config).await?;
    tokio::signal::ctrl_c().await?;
    tracing::info!("shutting down");
    service.stop().await
}
