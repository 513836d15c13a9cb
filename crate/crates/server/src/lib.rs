//! HTTP front end for [`reflect_core::session::SessionService`].
//!
//! Participant-facing routes return blinded views only. Condition overrides
//! and event-log export need the admin bearer token.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use reflect_core::bank::ExplorationBank;
use reflect_core::config::ServiceConfig;
use reflect_core::session::{
    Condition, Envelope, FileEventStore, MemoryEventStore, ParticipantView, PostQuestionnaire, PreQuestionnaire,
    SessionService, Topic, TurnReply,
};
use reflect_core::{Error, ThoughtCategory};
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Clone)]
pub struct AppState {
    service: Arc<SessionService>,
    admin_token: Option<Arc<str>>,
}

impl AppState {
    pub fn new(service: SessionService) -> Self {
        let admin_token = service.config().admin_token.as_deref().map(Arc::from);
        Self { service: Arc::new(service), admin_token }
    }

    pub fn service(&self) -> &SessionService {
        &self.service
    }
}

/// Opens the service described by `config`: event store, bank and backend.
pub fn build_service(config: ServiceConfig) -> reflect_core::Result<SessionService> {
    config.validate()?;
    let gateway = config.gateway()?;
    let bank = match &config.exploration_bank {
        Some(path) => ExplorationBank::load(path)?,
        None => ExplorationBank::embedded(),
    };
    let store: Box<dyn reflect_core::session::EventStore> = match &config.data_dir {
        Some(dir) => Box::new(FileEventStore::open(dir)?),
        None => Box::new(MemoryEventStore::new()),
    };
    SessionService::open(config, gateway, bank, store)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/topics", get(topics))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(view))
        .route("/sessions/{id}/consent", post(consent))
        .route("/sessions/{id}/prequestionnaire", post(pre_questionnaire))
        .route("/sessions/{id}/unaided", post(unaided))
        .route("/sessions/{id}/message", post(message))
        .route("/sessions/{id}/optout", post(opt_out))
        .route("/sessions/{id}/end", post(end))
        .route("/sessions/{id}/questionnaire", post(questionnaire))
        .route("/sessions/{id}/export", get(export))
        .with_state(state)
}

/// JSON error body: `{"error": kind, "message": text}` plus turn counts for gating errors.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, kind: &str, message: impl Into<String>) -> Self {
        Self { status, body: json!({"error": kind, "message": message.into()}) }
    }

    fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "admin bearer token required")
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        let (status, kind) = match &e {
            Error::Validation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "validation"),
            Error::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            Error::Phase { .. } => (StatusCode::CONFLICT, "phase"),
            Error::TurnsRemaining { completed, required, remaining } => {
                return Self {
                    status: StatusCode::CONFLICT,
                    body: json!({
                        "error": "turns_remaining",
                        "message": message,
                        "turns_completed": completed,
                        "turns_required": required,
                        "turns_remaining": remaining,
                    }),
                };
            }
            Error::Busy => (StatusCode::CONFLICT, "busy"),
            Error::NoActionAvailable => (StatusCode::CONFLICT, "no_action"),
            Error::Gateway(_) | Error::Parse { .. } => (StatusCode::BAD_GATEWAY, "gateway"),
            Error::UndefinedEffect | Error::Config(_) | Error::Io(_) | Error::Json(_) => {
                tracing::error!(error = %e, "internal error");
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        Self::new(status, kind, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs a blocking service call off the async executor.
async fn blocking<T: Send + 'static>(
    state: &AppState,
    f: impl FnOnce(&SessionService) -> reflect_core::Result<T> + Send + 'static,
) -> ApiResult<T> {
    let service = state.service.clone();
    match tokio::task::spawn_blocking(move || f(&service)).await {
        Ok(r) => r.map(Json).map_err(ApiError::from),
        Err(e) => {
            tracing::error!(error = %e, "worker task failed");
            Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", "worker task failed"))
        }
    }
}

fn is_admin(state: &AppState, headers: &HeaderMap) -> bool {
    let Some(expected) = &state.admin_token else { return false };
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .is_some_and(|t| t == &**expected)
}

async fn topics(State(state): State<AppState>) -> Json<Vec<Topic>> {
    Json(state.service.catalog().entries().to_vec())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub topic_id: String,
    /// Admin only.
    #[serde(default)]
    pub condition: Option<Condition>,
}

async fn create_session(
    State(state): State<AppState>,
    headers: HeaderMap,
    Json(body): Json<CreateSession>,
) -> Result<(StatusCode, Json<ParticipantView>), ApiError> {
    if body.condition.is_some() && !is_admin(&state, &headers) {
        return Err(ApiError::unauthorized());
    }
    let view = blocking(&state, move |s| s.create_session(&body.topic_id, body.condition)).await?;
    Ok((StatusCode::CREATED, view))
}

async fn view(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<ParticipantView> {
    blocking(&state, move |s| s.view(&id)).await
}

async fn consent(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<ParticipantView> {
    blocking(&state, move |s| s.consent(&id)).await
}

async fn pre_questionnaire(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(answers): Json<PreQuestionnaire>,
) -> ApiResult<ParticipantView> {
    blocking(&state, move |s| s.submit_pre_questionnaire(&id, answers)).await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TextBody {
    pub text: String,
}

async fn unaided(State(state): State<AppState>, Path(id): Path<String>, Json(body): Json<TextBody>) -> ApiResult<TurnReply> {
    blocking(&state, move |s| s.submit_unaided(&id, &body.text)).await
}

async fn message(State(state): State<AppState>, Path(id): Path<String>, Json(body): Json<TextBody>) -> ApiResult<TurnReply> {
    blocking(&state, move |s| s.post_message(&id, &body.text)).await
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OptOutBody {
    pub category: ThoughtCategory,
}

async fn opt_out(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(body): Json<OptOutBody>,
) -> ApiResult<ParticipantView> {
    blocking(&state, move |s| s.opt_out(&id, body.category)).await
}

async fn end(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<ParticipantView> {
    blocking(&state, move |s| s.end_session(&id)).await
}

async fn questionnaire(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(answers): Json<PostQuestionnaire>,
) -> ApiResult<ParticipantView> {
    blocking(&state, move |s| s.submit_questionnaire(&id, answers)).await
}

async fn export(
    State(state): State<AppState>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> ApiResult<Vec<Envelope>> {
    if !is_admin(&state, &headers) {
        return Err(ApiError::unauthorized());
    }
    blocking(&state, move |s| s.export(&id)).await
}
