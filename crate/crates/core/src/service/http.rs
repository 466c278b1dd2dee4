//! HTTP routes over [`Service`].

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::Deserialize;
use serde_json::{json, Value};

use super::{Service, ServiceError};
use crate::model::{self, JobState};

type Svc = State<Arc<Service>>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let code = match &self {
            ServiceError::UnknownBackend(_) | ServiceError::UnknownJob(_) | ServiceError::NotAvailable(_) => {
                StatusCode::NOT_FOUND
            }
            ServiceError::Malformed(_) => StatusCode::BAD_REQUEST,
            ServiceError::Rejected(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::NotReady { .. } => StatusCode::CONFLICT,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let mut body = json!({"error": self.code(), "message": self.to_string()});
        match &self {
            ServiceError::Rejected(r) => body["violations"] = serde_json::to_value(&r.violations).unwrap_or_default(),
            ServiceError::NotReady { status, .. } => body["status"] = json!(status),
            _ => {}
        }
        (code, Json(body)).into_response()
    }
}

fn raw_json(text: impl Into<String>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text.into()).into_response()
}

fn bad_request(msg: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({"error": "BadRequest", "message": msg}))).into_response()
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/v1/backends", get(backends))
        .route("/v1/backends/{name}/jobs", post(submit).get(list_jobs))
        .route("/v1/backends/{name}/{part}", get(backend_part))
        .route("/v1/jobs/{id}/status", get(status))
        .route("/v1/jobs/{id}/cancel", post(cancel))
        .route("/v1/jobs/{id}/result", get(result))
        .with_state(svc)
}

/// Serves until `shutdown` resolves, then stops the workers.
pub async fn serve(
    listener: tokio::net::TcpListener,
    svc: Arc<Service>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let app = router(svc.clone());
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    tokio::task::spawn_blocking(move || svc.shutdown()).await.map_err(std::io::Error::other)?;
    Ok(())
}

async fn backends(State(svc): Svc) -> Json<Value> {
    let list: Vec<Value> = svc
        .registry()
        .iter()
        .map(|b| {
            json!({
                "backend_name": b.name(),
                "backend_version": b.version(),
                "n_qubits": b.configuration.n_qubits,
                "open_pulse": b.configuration.open_pulse,
            })
        })
        .collect();
    Json(Value::Array(list))
}

async fn backend_part(State(svc): Svc, Path((name, part)): Path<(String, String)>) -> Result<Response, ServiceError> {
    let b = svc.backend(&name)?;
    let v = match part.as_str() {
        "configuration" => b.configuration.to_value(),
        "properties" => b.properties.as_ref().ok_or(ServiceError::NotAvailable("properties"))?.to_value(),
        "defaults" => b.defaults.as_ref().ok_or(ServiceError::NotAvailable("defaults"))?.to_value(),
        "schema" => b.schema.clone(),
        "status" => serde_json::to_value(svc.backend_status(&name)?).expect("status serializes"),
        _ => return Ok(StatusCode::NOT_FOUND.into_response()),
    };
    Ok(Json(v).into_response())
}

async fn submit(State(svc): Svc, Path(name): Path<String>, body: Bytes) -> Result<Response, ServiceError> {
    let s = svc.clone();
    let out = tokio::task::spawn_blocking(move || s.submit(&name, &body))
        .await
        .map_err(|e| ServiceError::Storage(e.to_string()))??;
    Ok((StatusCode::CREATED, Json(out)).into_response())
}

#[derive(Debug, Deserialize)]
struct ListQuery {
    since: Option<String>,
    status: Option<String>,
}

async fn list_jobs(State(svc): Svc, Path(name): Path<String>, Query(q): Query<ListQuery>) -> Response {
    let since = match q.since.as_deref().map(DateTime::parse_from_rfc3339).transpose() {
        Ok(t) => t.map(|t| t.with_timezone(&Utc)),
        Err(e) => return bad_request(format!("since: {e}")),
    };
    let status = match q.status.as_deref().map(|s| JobState::parse(s).ok_or(s)).transpose() {
        Ok(s) => s,
        Err(s) => return bad_request(format!("status: unknown job state {s:?}")),
    };
    match svc.list_jobs(&name, since, status) {
        Ok(js) => Json(js).into_response(),
        Err(e) => e.into_response(),
    }
}

async fn status(State(svc): Svc, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(svc.status(&id)?).into_response())
}

async fn cancel(State(svc): Svc, Path(id): Path<String>) -> Result<Response, ServiceError> {
    Ok(Json(svc.cancel(&id)?).into_response())
}

#[derive(Debug, Deserialize)]
struct ResultQuery {
    chunk: Option<u64>,
}

async fn result(State(svc): Svc, Path(id): Path<String>, Query(q): Query<ResultQuery>) -> Result<Response, ServiceError> {
    match q.chunk {
        None => Ok(raw_json(&*svc.result(&id)?)),
        Some(n) => Ok(raw_json(model::to_json(&svc.result_chunk(&id, n)?))),
    }
}
