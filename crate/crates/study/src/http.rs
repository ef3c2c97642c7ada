//! JSON-over-HTTP API.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | POST | `/studies` | `StudyPlan` | `StudyManifest` (201) |
//! | GET | `/studies/{s}` | | `StudyManifest` |
//! | GET | `/studies/{s}/report` | | [`StudyReport`](crate::StudyReport) |
//! | GET | `/participants/{p}/next-trial` | | `NextTrial` |
//! | GET | `/trials/{t}` | | `TrialView` |
//! | GET | `/trials/{t}/events` | | `[TrialEvent]` |
//! | POST | `/trials/{t}/reveal` | | `RevealResponse` |
//! | POST | `/trials/{t}/decision` | `{"decision": ..}` | `DecisionResponse` |
//!
//! Errors always carry an [`ErrorEnvelope`](crate::ErrorEnvelope).

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::error::StudyError;
use crate::plan::StudyPlan;
use crate::store::StudyService;
use crate::trial::Decision;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionRequest {
    pub decision: Decision,
}

type Shared = Arc<StudyService>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, StudyError> {
    let body: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    serde_json::from_slice(body).map_err(|e| StudyError::BadRequest(format!("invalid request body: {e}")))
}

async fn create_study(State(svc): State<Shared>, body: Bytes) -> Result<Response, StudyError> {
    let plan: StudyPlan = parse(&body)?;
    let manifest = svc.create_study(plan)?;
    Ok((StatusCode::CREATED, Json(manifest)).into_response())
}

async fn get_study(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, StudyError> {
    Ok(Json(svc.manifest(&id)?).into_response())
}

async fn report(State(svc): State<Shared>, Path(id): Path<String>) -> Result<Response, StudyError> {
    Ok(Json(svc.report(&id)?).into_response())
}

async fn next_trial(State(svc): State<Shared>, Path(p): Path<String>) -> Result<Response, StudyError> {
    Ok(Json(svc.next_trial(&p)?).into_response())
}

async fn get_trial(State(svc): State<Shared>, Path(t): Path<String>) -> Result<Response, StudyError> {
    Ok(Json(svc.trial_view(&t)?).into_response())
}

async fn events(State(svc): State<Shared>, Path(t): Path<String>) -> Result<Response, StudyError> {
    Ok(Json(svc.events(&t)?).into_response())
}

async fn reveal(State(svc): State<Shared>, Path(t): Path<String>) -> Result<Response, StudyError> {
    Ok(Json(svc.reveal(&t)?).into_response())
}

async fn decision(State(svc): State<Shared>, Path(t): Path<String>, body: Bytes) -> Result<Response, StudyError> {
    let req: DecisionRequest = parse(&body)?;
    Ok(Json(svc.decide(&t, req.decision)?).into_response())
}

async fn not_found() -> StudyError {
    StudyError::NotFound("route".into())
}

async fn wrong_method() -> StudyError {
    StudyError::MethodNotAllowed("method not allowed for this route".into())
}

/// Builds the API router. `static_dir`, when given, is served under `/ui`.
pub fn router(svc: Shared, static_dir: Option<PathBuf>) -> Router {
    let mut r = Router::new()
        .route("/studies", post(create_study))
        .route("/studies/{id}", get(get_study))
        .route("/studies/{id}/report", get(report))
        .route("/participants/{p}/next-trial", get(next_trial))
        .route("/trials/{t}", get(get_trial))
        .route("/trials/{t}/events", get(events))
        .route("/trials/{t}/reveal", post(reveal))
        .route("/trials/{t}/decision", post(decision))
        .method_not_allowed_fallback(wrong_method)
        .fallback(not_found)
        .with_state(svc);
    if let Some(dir) = static_dir {
        r = r.nest_service("/ui", ServeDir::new(dir));
    }
    r
}

/// Serves the API until the process is stopped.
pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    tracing::info!(addr = ?listener.local_addr().ok(), "study service listening");
    axum::serve(listener, app).await
}
