//! Session host for live participants of the policy-choice experiment.
//!
//! A session walks one participant through three phases (the problem text,
//! then the current state and goal, then the four policies in a per-session
//! random order) and appends the answer to a JSON Lines record log.

mod http;
mod session;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::StatusCode;
use thiserror::Error;

pub use http::{router, CreateSession, ProblemInfo, SubmitChoice};
pub use session::{
    live_cohort_id, Clock, ManualClock, Participant, Phase, PhaseContent, PolicyOption, SessionService, SessionView,
    SystemClock,
};
pub use store::ProblemStore;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ServiceError {
    #[error("unknown problem {0:?}")]
    UnknownProblem(String),
    #[error("unknown session {0:?}")]
    UnknownSession(String),
    #[error("cannot {action} in phase {}", phase.as_str())]
    PhaseOrderViolation { phase: Phase, action: &'static str },
    #[error("a choice was already submitted for this session")]
    DuplicateSubmission,
    #[error("invalid policy label {0:?}, expected one of A, B, C, D")]
    InvalidLabel(String),
    #[error("no records for cohort {0:?}")]
    UnknownCohort(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("not found")]
    NotFound,
    #[error("cannot summarize cohort: {0}")]
    Summary(String),
    #[error("storage error: {0}")]
    Storage(String),
}

impl ServiceError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownProblem(_) => "unknown_problem",
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::PhaseOrderViolation { .. } => "phase_order_violation",
            ServiceError::DuplicateSubmission => "duplicate_submission",
            ServiceError::InvalidLabel(_) => "invalid_label",
            ServiceError::UnknownCohort(_) => "unknown_cohort",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::NotFound => "not_found",
            ServiceError::Summary(_) => "summary_failed",
            ServiceError::Storage(_) => "storage_error",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownProblem(_)
            | ServiceError::UnknownSession(_)
            | ServiceError::UnknownCohort(_)
            | ServiceError::NotFound => StatusCode::NOT_FOUND,
            ServiceError::PhaseOrderViolation { .. } | ServiceError::DuplicateSubmission => StatusCode::CONFLICT,
            ServiceError::InvalidLabel(_) | ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::Summary(_) | ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub listen: SocketAddr,
    /// Directory of `*.problem.json` files; the bundled problems when absent.
    pub fixtures: Option<PathBuf>,
    pub log: PathBuf,
}

/// Binds `config.listen` and serves until Ctrl-C.
pub async fn serve(config: ServeConfig) -> Result<(), ServiceError> {
    let problems = match &config.fixtures {
        Some(dir) => ProblemStore::from_dir(dir)?,
        None => ProblemStore::bundled(),
    };
    let service = Arc::new(SessionService::new(problems, &config.log, Arc::new(SystemClock))?);
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|e| ServiceError::Storage(format!("cannot bind {}: {e}", config.listen)))?;
    tracing::info!(addr = %config.listen, log = %config.log.display(), "serving");
    axum::serve(listener, router(service))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Storage(e.to_string()))
}
