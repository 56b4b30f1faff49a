// Copyright 2026 The faqfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//! HTTP front end over an assembled pipeline.
//!
//! Routes: `GET /health`, `POST /retrieve`, `POST /match`. Bodies are JSON;
//! malformed requests get a 400 with an `{"error": ...}` body.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use faqfuse::bm25::SNAPSHOT_FORMAT;
use faqfuse::scorer::ScorerError;
use faqfuse::{Error, Pipeline};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;

use crate::view::RetrieveResponse;

pub const DEFAULT_TOP_K: usize = 5;

struct AppState {
    pipeline: Arc<Pipeline>,
    requests: AtomicU64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrieveRequest {
    pub query: String,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
}

fn default_top_k() -> usize {
    DEFAULT_TOP_K
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchRequest {
    pub left: String,
    pub right: String,
}

pub fn router(pipeline: Arc<Pipeline>) -> Router {
    let state = Arc::new(AppState {
        pipeline,
        requests: AtomicU64::new(0),
    });
    Router::new()
        .route("/health", get(health))
        .route("/retrieve", post(retrieve))
        .route("/match", post(match_pair))
        .with_state(state)
}

/// Binds `addr` and serves until ctrl-c.
pub async fn serve(pipeline: Arc<Pipeline>, addr: SocketAddr) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| anyhow::anyhow!("binding {addr}: {e}"))?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(pipeline))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

fn error(status: StatusCode, message: impl std::fmt::Display) -> Response {
    (status, Json(json!({ "error": message.to_string() }))).into_response()
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error(StatusCode::BAD_REQUEST, format!("invalid request: {e}")))
}

fn pipeline_error(e: Error) -> Response {
    let status = match &e {
        Error::InvalidArgument(_) => StatusCode::BAD_REQUEST,
        Error::Scorer(ScorerError::Timeout { .. }) => StatusCode::GATEWAY_TIMEOUT,
        Error::Scorer(_) => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    error(status, e)
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    let p = &state.pipeline;
    Json(json!({
        "status": "ok",
        "model": p.scorer_name().unwrap_or_else(|| "bm25".to_owned()),
        "version": env!("CARGO_PKG_VERSION"),
        "index": SNAPSHOT_FORMAT,
        "pairs": p.corpus().len(),
        "answers": p.corpus().answers().len(),
        "triplets": p.knowledge().map_or(0, |kb| kb.len()),
        "requests": state.requests.load(Ordering::Relaxed),
    }))
    .into_response()
}

async fn retrieve(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    state.requests.fetch_add(1, Ordering::Relaxed);
    let req: RetrieveRequest = match parse(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    if req.top_k == 0 {
        return error(StatusCode::BAD_REQUEST, "top_k must be positive");
    }
    let pipeline = state.pipeline.clone();
    // a remote scorer blocks on its HTTP call
    let outcome = tokio::task::spawn_blocking(move || {
        pipeline
            .retrieve(&req.query)
            .map(|ranked| RetrieveResponse::new(&pipeline, &ranked, req.top_k))
    })
    .await;
    match outcome {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(e)) => pipeline_error(e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}

async fn match_pair(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    state.requests.fetch_add(1, Ordering::Relaxed);
    let req: MatchRequest = match parse(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let pipeline = state.pipeline.clone();
    let outcome = tokio::task::spawn_blocking(move || pipeline.match_pair(&req.left, &req.right)).await;
    match outcome {
        Ok(Ok(m)) => Json(m).into_response(),
        Ok(Err(e)) => pipeline_error(e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}
