//! HTTP front end over an immutable graph.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use crate::api::{self, DiversifyRequest};
use crate::corpus::DocumentGraph;
use crate::error::Error;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub error: ErrorBody,
}

pub fn status_for(err: &Error) -> StatusCode {
    match err.code() {
        "DOC_NOT_FOUND" | "NO_MATCHING_CENTER" => StatusCode::NOT_FOUND,
        "INSUFFICIENT_VERTICES" => StatusCode::UNPROCESSABLE_ENTITY,
        "IO_ERROR" => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::BAD_REQUEST,
    }
}

struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorResponse { error: ErrorBody { code: self.0.code().to_string(), message: self.0.to_string() } };
        (status_for(&self.0), Json(body)).into_response()
    }
}

fn invalid(message: String) -> ApiError {
    ApiError(Error::InvalidParams(message))
}

type Graph = Arc<DocumentGraph>;

/// Routes of the service; the graph is shared read-only between requests.
pub fn router(graph: Graph) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/diversify", post(diversify))
        .route("/api/doc/{id}", get(doc))
        .route("/api/neighborhood", get(neighborhood))
        .with_state(graph)
}

async fn health(State(graph): State<Graph>) -> Json<api::Health> {
    Json(api::health(&graph))
}

async fn diversify(
    State(graph): State<Graph>,
    body: Result<Json<DiversifyRequest>, JsonRejection>,
) -> Result<Json<api::DiversifyResponse>, ApiError> {
    let Json(req) = body.map_err(|e| invalid(e.body_text()))?;
    let out = tokio::task::spawn_blocking(move || api::diversify_request(&graph, &req))
        .await
        .map_err(|e| ApiError(Error::Io(std::io::Error::other(e.to_string()))))??;
    Ok(Json(out))
}

async fn doc(State(graph): State<Graph>, Path(id): Path<String>) -> Result<Json<api::DocView>, ApiError> {
    Ok(Json(api::doc_view(&graph, &id)?))
}

#[derive(Debug, Deserialize)]
struct NeighborhoodQuery {
    id: String,
    #[serde(default = "default_hops")]
    hops: usize,
}

fn default_hops() -> usize {
    2
}

async fn neighborhood(
    State(graph): State<Graph>,
    query: Result<Query<NeighborhoodQuery>, QueryRejection>,
) -> Result<Json<api::Neighborhood>, ApiError> {
    let Query(q) = query.map_err(|e| invalid(e.body_text()))?;
    Ok(Json(api::neighborhood(&graph, &q.id, q.hops)?))
}

/// Serves until the process is stopped.
pub async fn serve(graph: Graph, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(graph)).await
}
