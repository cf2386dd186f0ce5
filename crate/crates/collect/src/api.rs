//! HTTP routes.
//!
//! | method | path                          | success |
//! |--------|-------------------------------|---------|
//! | POST   | `/api/tasks`                  | 201 `{"task_id"}` |
//! | GET    | `/api/tasks/{id}`             | 200 task |
//! | POST   | `/api/tasks/{id}/solutions`   | 201 stored submission |
//! | GET    | `/api/tasks/{id}/solutions`   | 200 submissions |
//! | POST   | `/api/tasks/{id}/consensus`   | 200 consensus document |
//! | POST   | `/api/tasks/{id}/close`       | 200 task |
//!
//! Everything else falls through to the static UI directory, if any.
//! Errors are `{"error": message, "field": path?}` with status 400, 404,
//! 409 or 500.

use std::path::Path;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;
use tower_http::services::ServeDir;

use crowd_consensus::formats::{serialize_json, ResultDocument};
use crowd_consensus::{consensus, ConsensusConfig};

use crate::error::{CollectError, Result};
use crate::model::{ConsensusDocument, CreatedTask, ItemGroup, SubmissionRequest, TaskDescriptor};
use crate::Service;

pub fn router(service: Service, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/tasks", post(create_task))
        .route("/api/tasks/{id}", get(get_task))
        .route("/api/tasks/{id}/solutions", post(submit_solution).get(list_solutions))
        .route("/api/tasks/{id}/consensus", post(run_consensus))
        .route("/api/tasks/{id}/close", post(close_task))
        .with_state(service);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn json<T: Serialize>(status: StatusCode, value: &T) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], serialize_json(value)).into_response()
}

fn decode<T: DeserializeOwned>(body: &Bytes) -> Result<T> {
    serde_json::from_slice(body).map_err(|e| CollectError::BadRequest {
        field: None,
        message: format!("invalid request body: {e}"),
    })
}

async fn create_task(State(service): State<Service>, body: Bytes) -> Result<Response> {
    let descriptor: TaskDescriptor = decode(&body)?;
    let task = service.create_task(descriptor).await?;
    Ok(json(StatusCode::CREATED, &CreatedTask { task_id: task.task_id }))
}

async fn get_task(State(service): State<Service>, UrlPath(id): UrlPath<String>) -> Result<Response> {
    let state = service.read().await;
    Ok(json(StatusCode::OK, state.task(&id)?))
}

async fn submit_solution(
    State(service): State<Service>,
    UrlPath(id): UrlPath<String>,
    body: Bytes,
) -> Result<Response> {
    let request: SubmissionRequest = decode(&body)?;
    let submission = service.submit(&id, request).await?;
    Ok(json(StatusCode::CREATED, &submission))
}

async fn list_solutions(State(service): State<Service>, UrlPath(id): UrlPath<String>) -> Result<Response> {
    let state = service.read().await;
    Ok(json(StatusCode::OK, &state.submissions(&id)?))
}

async fn run_consensus(State(service): State<Service>, UrlPath(id): UrlPath<String>) -> Result<Response> {
    let (items, ensemble) = {
        let state = service.read().await;
        (state.task(&id)?.items.clone(), state.ensemble(&id)?)
    };
    let result = consensus(&ensemble, &ConsensusConfig::default()).map_err(|e| CollectError::Internal(e.to_string()))?;
    let doc = ConsensusDocument {
        task_id: id,
        num_submissions: ensemble.num_solutions(),
        items: items
            .into_iter()
            .zip(result.labels.labels())
            .map(|(item, &group)| ItemGroup {
                item_id: item.item_id,
                group,
            })
            .collect(),
        result: ResultDocument::from(&result),
    };
    Ok(json(StatusCode::OK, &doc))
}

async fn close_task(State(service): State<Service>, UrlPath(id): UrlPath<String>) -> Result<Response> {
    let task = service.close(&id).await?;
    Ok(json(StatusCode::OK, &task))
}
