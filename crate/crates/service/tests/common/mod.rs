#![allow(dead_code)]

use std::sync::OnceLock;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use glens::{AppState, Dataset, ServiceConfig};
use glens_core::graph::{build_network, ContractId, Date, Enterprise, Installment, LoanContract};
use glens_core::ingest::SyntheticConfig;
use glens_core::{EnterpriseId, GuaranteeEdge};

pub fn d(s: &str) -> Date {
    s.parse().unwrap()
}

pub fn small_config() -> SyntheticConfig {
    SyntheticConfig { community_count: 4, ..Default::default() }
}

pub fn small_dataset() -> Dataset {
    Dataset::synthetic(&small_config()).expect("synthetic dataset")
}

/// B→A; C→B; D→B; E→C, E→D, E→F, E→G, E→H (guarantor → borrower).
pub fn worked_example_dataset() -> Dataset {
    let pairs = [("B", "A"), ("C", "B"), ("D", "B"), ("E", "C"), ("E", "D"), ("E", "F"), ("E", "G"), ("E", "H")];
    let names = ["A", "B", "C", "D", "E", "F", "G", "H"];
    let enterprises = names.iter().map(|n| Enterprise::new(*n)).collect();
    let contracts = names
        .iter()
        .map(|n| LoanContract {
            contract_id: ContractId::new(format!("L-{n}")),
            borrower: EnterpriseId::new(*n),
            loan_amount: 1000.0,
            start_date: d("2013-01-01"),
            installments: vec![Installment { due_date: d("2016-01-01"), due_amount: 1000.0 }],
            capital_return: "bullet".into(),
            interest_return: "monthly".into(),
        })
        .collect();
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(i, (g, b))| GuaranteeEdge {
            guarantor: EnterpriseId::new(*g),
            borrower: EnterpriseId::new(*b),
            amount: 100.0 * (i + 1) as f64,
            contract_id: ContractId::new(format!("G{i:04}")),
            loan_contract_id: ContractId::new(format!("L-{b}")),
            valid_from: d("2013-01-01"),
            valid_to: None,
        })
        .collect();
    Dataset::new(build_network(enterprises, edges, contracts, Vec::new()).unwrap()).unwrap()
}

pub fn app_with(dataset: Dataset, workers: usize) -> Router {
    glens::router(AppState::new(dataset, &ServiceConfig { workers, ..Default::default() }))
}

/// One app over the small synthetic dataset, shared by read-only tests.
pub fn shared_app() -> Router {
    static APP: OnceLock<Router> = OnceLock::new();
    APP.get_or_init(|| app_with(small_dataset(), 2)).clone()
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(serde_json::to_vec(&v).unwrap())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let json = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, json)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

pub async fn new_session(app: &Router) -> String {
    let (status, body) = post(app, "/api/v1/sessions", serde_json::json!({})).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["data"]["id"].as_str().unwrap().to_string()
}

/// Polls until the job leaves queued/running; panics after `limit`.
pub async fn wait_job(app: &Router, id: &str, limit: Duration) -> Value {
    let start = std::time::Instant::now();
    loop {
        let (status, body) = get(app, &format!("/api/v1/jobs/{id}")).await;
        assert_eq!(status, StatusCode::OK);
        let state = body["data"]["state"].as_str().unwrap().to_string();
        if state != "queued" && state != "running" {
            return body["data"].clone();
        }
        assert!(start.elapsed() < limit, "job {id} still {state}");
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
}

pub fn assert_error_shape(body: &Value, code: &str) {
    assert_eq!(body["code"], code, "{body}");
    assert!(body["message"].is_string(), "{body}");
    assert!(body.get("detail").is_some(), "{body}");
}

