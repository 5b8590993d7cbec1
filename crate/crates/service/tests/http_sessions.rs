use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use ccb_core::experiment::read_records;
use ccb_service::{router, ManualClock, ProblemStore, SessionService};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(dir: &tempfile::TempDir) -> Router {
    let svc = SessionService::new(ProblemStore::bundled(), dir.path().join("log.jsonl"), Arc::new(ManualClock::new(10)))
        .unwrap();
    router(Arc::new(svc))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn scripted_participant() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);

    let (status, problems) = call(&app, "GET", "/problems", None).await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<&str> = problems.as_array().unwrap().iter().map(|p| p["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["student", "war_on_drugs"]);
    assert!(problems[0].get("flag").is_none());

    let (status, s) = call(&app, "POST", "/sessions", Some(json!({"problem_id": "war_on_drugs", "occupation": "nurse"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(s["phase"], "presented_problem");
    let id = s["session_id"].as_str().unwrap().to_string();

    let (_, s) = call(&app, "POST", &format!("/sessions/{id}/advance"), None).await;
    assert_eq!(s["phase"], "presented_state_goal");
    assert_eq!(s["content"]["goal"], "Decrease in drug related deaths");
    let (_, s) = call(&app, "POST", &format!("/sessions/{id}/advance"), None).await;
    assert_eq!(s["phase"], "awaiting_choice");
    let order = s["content"]["policies"].clone();
    assert_eq!(order.as_array().unwrap().len(), 4);
    let (_, again) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(again["content"]["policies"], order);

    let (status, err) = call(&app, "POST", &format!("/sessions/{id}/advance"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"]["code"], "phase_order_violation");

    let (status, err) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"label": "E"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(err["error"]["code"], "invalid_label");

    let (status, done) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"label": "B"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(done["record"]["chosen"], "B");
    assert_eq!(done["session"]["phase"], "completed");

    let log = dir.path().join("log.jsonl");
    let before = std::fs::read(&log).unwrap();
    let (status, err) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"label": "A"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"]["code"], "duplicate_submission");
    assert_eq!(std::fs::read(&log).unwrap(), before);

    let records = read_records(&log).unwrap();
    assert_eq!(records.len(), 1);
    let ts = records[0].phase_timestamps;
    assert!(ts[0] < ts[1] && ts[1] < ts[2]);
    assert_eq!(records[0].occupation.as_deref(), Some("nurse"));

    let (status, summary) = call(&app, "GET", "/cohorts/live:war_on_drugs/summary", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(summary["n"], 1);
    assert_eq!(summary["ccb_rate"], 1.0);
}

#[tokio::test]
async fn error_mapping() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let (status, err) = call(&app, "POST", "/sessions", Some(json!({"problem_id": "missing"}))).await;
    assert_eq!((status, err["error"]["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_problem")));
    let (status, err) = call(&app, "GET", "/sessions/deadbeef", None).await;
    assert_eq!((status, err["error"]["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_session")));
    let (status, err) = call(&app, "POST", "/sessions", Some(json!({"nope": 1}))).await;
    assert_eq!((status, err["error"]["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")));
    let (status, err) = call(&app, "GET", "/cohorts/live:student/summary", None).await;
    assert_eq!((status, err["error"]["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_cohort")));
    let (status, err) = call(&app, "GET", "/elsewhere", None).await;
    assert_eq!((status, err["error"]["code"].as_str()), (StatusCode::NOT_FOUND, Some("not_found")));

    let (_, s) = call(&app, "POST", "/sessions", Some(json!({"problem_id": "student"}))).await;
    let id = s["session_id"].as_str().unwrap();
    let (status, err) = call(&app, "POST", &format!("/sessions/{id}/choice"), Some(json!({"label": "A"}))).await;
    assert_eq!((status, err["error"]["code"].as_str()), (StatusCode::CONFLICT, Some("phase_order_violation")));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_sessions_leave_one_line_each() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let mut tasks = Vec::new();
    for i in 0..40 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            let (_, s) = call(&app, "POST", "/sessions", Some(json!({"problem_id": "student"}))).await;
            let id = s["session_id"].as_str().unwrap().to_string();
            call(&app, "POST", &format!("/sessions/{id}/advance"), None).await;
            call(&app, "POST", &format!("/sessions/{id}/advance"), None).await;
            let label = ["A", "B", "C", "D"][i % 4];
            // Racing duplicate submissions: exactly one may win.
            let uri = format!("/sessions/{id}/choice");
            let (a, b) = tokio::join!(
                call(&app, "POST", &uri, Some(json!({"label": label}))),
                call(&app, "POST", &uri, Some(json!({"label": label}))),
            );
            let ok = [a.0, b.0].iter().filter(|s| **s == StatusCode::OK).count();
            assert_eq!(ok, 1);
            id
        }));
    }
    let mut ids = Vec::new();
    for t in tasks {
        ids.push(t.await.unwrap());
    }
    let records = read_records(dir.path().join("log.jsonl")).unwrap();
    assert_eq!(records.len(), 40);
    let mut logged: Vec<String> = records.iter().map(|r| r.session_id.clone().unwrap()).collect();
    logged.sort();
    ids.sort();
    assert_eq!(logged, ids);
    for r in &records {
        let ts = r.phase_timestamps;
        assert!(ts[0] < ts[1] && ts[1] < ts[2]);
    }
}
