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
//! HTTP routes exercised in-process.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use faqfuse::knowledge::{InjectionConfig, KnowledgeBase, SourceTag, Triplet};
use faqfuse::scorer::TfIdfScorer;
use faqfuse::{Bm25Index, Bm25Params, FusionConfig, Pipeline};
use faqfuse_cli::service::router;
use faqfuse_cli::view::RetrieveResponse;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn pipeline(alpha: f64, with_scorer: bool) -> Arc<Pipeline> {
    let corpus = common::self_retrieval_corpus(60);
    let index = Bm25Index::build(&corpus, Bm25Params::default()).unwrap();
    let kb = KnowledgeBase::from_triplets(
        [Triplet::new("common3", "related_to", "common4").unwrap()],
        SourceTag::External,
    );
    let scorer = with_scorer.then(|| Box::new(TfIdfScorer::fit(&corpus)) as _);
    let fusion = FusionConfig { alpha, ..FusionConfig::default() };
    Arc::new(Pipeline::new(corpus, index, Some(kb), InjectionConfig::default(), scorer, fusion).unwrap())
}

async fn call(p: &Arc<Pipeline>, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_owned()))
        .unwrap();
    let resp = router(p.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn health_reports_components() {
    let p = pipeline(0.5, true);
    let (status, body) = call(&p, "GET", "/health", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
    assert_eq!(body["model"], "tfidf-baseline");
    assert_eq!(body["pairs"], 60);
    assert_eq!(body["triplets"], 1);
    assert!(body["version"].is_string());
}

#[tokio::test]
async fn training_questions_retrieve_their_answers() {
    let p = pipeline(1.0, false);
    for pair in p.corpus().pairs().iter().take(20) {
        let (status, body) = call(&p, "POST", "/retrieve", &json!({ "query": pair.question }).to_string()).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["answer"], pair.answer.as_str());
        assert_eq!(body["ranked"].as_array().unwrap().len(), 5);
    }
}

#[tokio::test]
async fn responses_equal_direct_library_calls() {
    let p = pipeline(0.5, true);
    for q in ["uniq4a common3", "common7 nothing", "zzz"] {
        let (status, body) = call(&p, "POST", "/retrieve", &json!({ "query": q, "top_k": 7 }).to_string()).await;
        assert_eq!(status, StatusCode::OK);
        let direct = RetrieveResponse::new(&p, &p.retrieve(q).unwrap(), 7);
        let served: RetrieveResponse = serde_json::from_value(body).unwrap();
        assert_eq!(served, direct);
    }
    let (status, body) = call(
        &p,
        "POST",
        "/match",
        &json!({ "left": "uniq1a common3", "right": "uniq1a uniq1b" }).to_string(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let direct = p.match_pair("uniq1a common3", "uniq1a uniq1b").unwrap();
    assert_eq!(body["score"].as_f64().unwrap(), direct.score);
    assert_eq!(body["label"].as_u64().unwrap(), u64::from(direct.label));
}

#[tokio::test]
async fn malformed_requests_get_400_with_error_body() {
    let p = pipeline(0.5, true);
    for (uri, body) in [
        ("/retrieve", "{not json"),
        ("/retrieve", r#"{"top_k": 3}"#),
        ("/retrieve", r#"{"query": "x", "top_k": 0}"#),
        ("/retrieve", r#"{"query": "x", "top_k": -1}"#),
        ("/match", r#"{"left": "a"}"#),
        ("/match", ""),
    ] {
        let (status, resp) = call(&p, "POST", uri, body).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri} {body}");
        assert!(resp["error"].as_str().is_some_and(|e| !e.is_empty()), "{uri} {body}");
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_agree() {
    let p = pipeline(0.5, true);
    let body = json!({ "query": "uniq9b common3 common5" }).to_string();
    let expected = call(&p, "POST", "/retrieve", &body).await;
    let handles: Vec<_> = (0..16)
        .map(|_| {
            let (p, body) = (p.clone(), body.clone());
            tokio::spawn(async move { call(&p, "POST", "/retrieve", &body).await })
        })
        .collect();
    for h in handles {
        assert_eq!(h.await.unwrap(), expected);
    }
}
