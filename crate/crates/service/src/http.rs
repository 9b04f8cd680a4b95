//! HTTP routes.

use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use dupwatch_core::feeds::{
    instructor_feed, student_feed, FeedItem, StudentFeedParams, TriageItem,
};
use dupwatch_core::{DraftQuestion, Recommendation};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ServiceConfig;
use crate::events::{EventLog, EventRecord};
use crate::state::{ClassHealth, Registry, Snapshot};

/// Everything a request handler needs.
#[derive(Debug)]
pub struct AppState {
    pub registry: Arc<Registry>,
    pub events: EventLog,
    pub recommendation_k: usize,
    pub feed: StudentFeedParams,
}

impl AppState {
    pub fn new(registry: Arc<Registry>, events: EventLog, config: &ServiceConfig) -> Self {
        Self {
            registry,
            events,
            recommendation_k: config.recommendation_k,
            feed: StudentFeedParams {
                size: config.feed_size,
                theta_days: config.theta_days,
                age_cutoff_days: config.age_cutoff_days,
            },
        }
    }
}

/// JSON error body: `{"error": <code>, "detail": <text>}`.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    detail: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, detail: impl Into<String>) -> Self {
        Self {
            status,
            code,
            detail: detail.into(),
        }
    }

    fn unknown_class(class_id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown_class",
            format!("no class {class_id:?}"),
        )
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code, "detail": self.detail });
        (self.status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        let code = match r {
            JsonRejection::JsonDataError(_) => "invalid_fields",
            JsonRejection::JsonSyntaxError(_) => "invalid_json",
            JsonRejection::MissingJsonContentType(_) => "missing_content_type",
            _ => "unreadable_body",
        };
        Self::new(StatusCode::BAD_REQUEST, code, r.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "invalid_query", r.body_text())
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn snapshot(state: &AppState, class_id: &str) -> Result<Arc<Snapshot>, ApiError> {
    state
        .registry
        .snapshot(class_id)
        .ok_or_else(|| ApiError::unknown_class(class_id))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecommendResponse {
    pub class_id: String,
    /// Identifies the snapshot that produced every score in this response.
    pub trained_at: DateTime<Utc>,
    pub n_posts: usize,
    pub recommendations: Vec<Recommendation>,
}

async fn recommend(
    State(state): State<Arc<AppState>>,
    Path(class_id): Path<String>,
    body: Result<Json<DraftQuestion>, JsonRejection>,
) -> ApiResult<RecommendResponse> {
    let snap = snapshot(&state, &class_id)?;
    let Json(draft) = body?;
    if draft.is_empty() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "empty_draft",
            "title, body and tags are all empty",
        ));
    }
    let k = state.recommendation_k;
    // scoring is a CPU-bound scan; keep it off the async workers
    let (snap, recommendations) = tokio::task::spawn_blocking(move || {
        let recs = snap.model.recommend(&draft, k);
        (snap, recs)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let recommendations = recommendations
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "empty_draft", e.to_string()))?;
    Ok(Json(RecommendResponse {
        class_id,
        trained_at: snap.trained_at(),
        n_posts: snap.corpus.len(),
        recommendations,
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedQuery {
    /// Evaluate the feed as of this instant instead of the current time.
    now: Option<DateTime<Utc>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FeedResponse<T> {
    pub class_id: String,
    pub trained_at: DateTime<Utc>,
    pub items: Vec<T>,
}

async fn feed_student(
    State(state): State<Arc<AppState>>,
    Path(class_id): Path<String>,
    query: Result<Query<FeedQuery>, QueryRejection>,
) -> ApiResult<FeedResponse<FeedItem>> {
    let snap = snapshot(&state, &class_id)?;
    let Query(q) = query?;
    let items = student_feed(&snap.corpus, q.now.unwrap_or_else(Utc::now), state.feed);
    Ok(Json(FeedResponse {
        class_id,
        trained_at: snap.trained_at(),
        items,
    }))
}

async fn feed_instructor(
    State(state): State<Arc<AppState>>,
    Path(class_id): Path<String>,
    query: Result<Query<FeedQuery>, QueryRejection>,
) -> ApiResult<FeedResponse<TriageItem>> {
    let snap = snapshot(&state, &class_id)?;
    let Query(q) = query?;
    let now = q.now.unwrap_or_else(Utc::now);
    let items = instructor_feed(&snap.corpus, now, state.feed.size);
    Ok(Json(FeedResponse {
        class_id,
        trained_at: snap.trained_at(),
        items,
    }))
}

async fn record_event(
    State(state): State<Arc<AppState>>,
    body: axum::body::Bytes,
) -> Result<Json<serde_json::Value>, ApiError> {
    let event = EventRecord::parse(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string()))?;
    if !state.registry.contains(&event.class_id) {
        return Err(ApiError::unknown_class(&event.class_id));
    }
    let state2 = Arc::clone(&state);
    tokio::task::spawn_blocking(move || state2.events.append(&event))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
        .map_err(|e| {
            tracing::error!(error = %e, "event log write failed");
            ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "event_log_unavailable",
                e.to_string(),
            )
        })?;
    Ok(Json(json!({ "ok": true })))
}

#[derive(Debug, Serialize)]
struct HealthResponse {
    classes: Vec<ClassHealth>,
}

async fn health(State(state): State<Arc<AppState>>) -> Json<HealthResponse> {
    Json(HealthResponse {
        classes: state.registry.health(),
    })
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no_route", "no such endpoint")
}

/// The API router, plus static assets under `/ui` when `ui_dir` is set.
pub fn router(state: Arc<AppState>, ui_dir: Option<&std::path::Path>) -> Router {
    let mut app = Router::new()
        .route("/classes/{class_id}/recommend", post(recommend))
        .route("/classes/{class_id}/feed/student", get(feed_student))
        .route("/classes/{class_id}/feed/instructor", get(feed_instructor))
        .route("/events", post(record_event))
        .route("/health", get(health))
        .fallback(not_found)
        .with_state(state);
    if let Some(dir) = ui_dir {
        app = app.nest_service("/ui", tower_http::services::ServeDir::new(dir));
    }
    app
}
