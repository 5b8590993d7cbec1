use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::session::{Participant, SessionService, SessionView};
use crate::ServiceError;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code(), "message": self.to_string() } });
        (self.status(), Json(body)).into_response()
    }
}

fn bad_request(rejection: JsonRejection) -> ServiceError {
    ServiceError::BadRequest(rejection.body_text())
}

#[derive(Debug, Deserialize)]
pub struct CreateSession {
    pub problem_id: String,
    #[serde(flatten)]
    pub participant: Participant,
}

#[derive(Debug, Deserialize)]
pub struct SubmitChoice {
    pub label: String,
}

#[derive(Debug, Serialize)]
pub struct ProblemInfo {
    pub id: String,
    pub description: String,
    pub goal: Option<String>,
}

type Shared = State<Arc<SessionService>>;

async fn create(State(svc): Shared, body: Result<Json<CreateSession>, JsonRejection>) -> Result<(StatusCode, Json<SessionView>), ServiceError> {
    let Json(req) = body.map_err(bad_request)?;
    let view = svc.create_session(&req.problem_id, req.participant)?;
    tracing::info!(session = %view.session_id, problem = %view.problem_id, "session created");
    Ok((StatusCode::CREATED, Json(view)))
}

async fn advance(State(svc): Shared, Path(id): Path<String>) -> Result<Json<SessionView>, ServiceError> {
    Ok(Json(svc.advance_phase(&id)?))
}

async fn fetch(State(svc): Shared, Path(id): Path<String>) -> Result<Json<SessionView>, ServiceError> {
    Ok(Json(svc.get_session(&id)?))
}

async fn choose(
    State(svc): Shared,
    Path(id): Path<String>,
    body: Result<Json<SubmitChoice>, JsonRejection>,
) -> Result<Json<serde_json::Value>, ServiceError> {
    let Json(req) = body.map_err(bad_request)?;
    let svc2 = svc.clone();
    // The append syncs to disk; keep it off the async workers.
    let record = tokio::task::spawn_blocking(move || svc2.submit_choice(&id, &req.label))
        .await
        .map_err(|e| ServiceError::Storage(e.to_string()))??;
    tracing::info!(session = ?record.session_id, chosen = %record.chosen, "choice recorded");
    Ok(Json(json!({ "record": record, "session": svc.get_session(record.session_id.as_deref().unwrap_or_default())? })))
}

async fn problems(State(svc): Shared) -> Json<Vec<ProblemInfo>> {
    Json(
        svc.problems()
            .iter()
            .map(|p| ProblemInfo { id: p.id.clone(), description: p.description.clone(), goal: p.goal_text.clone() })
            .collect(),
    )
}

async fn cohort(State(svc): Shared, Path(id): Path<String>) -> Result<Json<ccb_core::experiment::CohortSummary>, ServiceError> {
    Ok(Json(svc.cohort_summary(&id)?))
}

/// Routes:
///
/// | method | path                       | body                  |
/// |--------|----------------------------|-----------------------|
/// | POST   | `/sessions`                | `{"problem_id": ...}` |
/// | POST   | `/sessions/{id}/advance`   |                       |
/// | GET    | `/sessions/{id}`           |                       |
/// | POST   | `/sessions/{id}/choice`    | `{"label": "A"}`      |
/// | GET    | `/problems`                |                       |
/// | GET    | `/cohorts/{id}/summary`    |                       |
pub fn router(service: Arc<SessionService>) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(fetch))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/choice", post(choose))
        .route("/problems", get(problems))
        .route("/cohorts/{id}/summary", get(cohort))
        .fallback(|| async { ServiceError::NotFound })
        .with_state(service)
}
