mod common;

use std::time::Duration;

use axum::http::{Method, StatusCode};
use serde_json::json;

use common::*;
use glens::jobs::{run_job, JobRequest};
use glens_core::patterns::Motif;
use glens_core::RunControl;

const LIMIT: Duration = Duration::from_secs(120);

#[tokio::test]
async fn census_job_finishes_with_the_report() {
    let app = app_with(small_dataset(), 2);
    let (status, body) = post(&app, "/api/v1/jobs", json!({ "kind": "census", "k": 3 })).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{body}");
    assert_eq!(body["data"]["kind"], "census");
    let id = body["data"]["id"].as_str().unwrap();
    let done = wait_job(&app, id, LIMIT).await;
    assert_eq!(done["state"], "done");
    assert_eq!(done["progress"], 1.0);
    assert_eq!(done["partial"], false);
    let report = &done["result"];
    assert_eq!(report["k"], 3);
    let total: u64 = report["classes"].as_array().unwrap().iter().map(|c| c["count"].as_u64().unwrap()).sum();
    assert_eq!(report["subgraphs"].as_u64().unwrap(), total);
    assert!(total > 0);

    // Same payload as running the job inline.
    let direct = run_job(&small_dataset(), &JobRequest::Census { k: 3, date: None, budget: None }, &RunControl::new()).unwrap();
    assert_eq!(direct.result, *report);
}

#[tokio::test]
async fn identical_jobs_give_identical_payloads() {
    let app = app_with(small_dataset(), 2);
    for req in [
        json!({ "kind": "census", "k": 4 }),
        json!({ "kind": "match", "motif": { "k": 3, "edges": [[0, 1], [1, 2], [0, 2]] } }),
        json!({ "kind": "importance", "max_len": 5 }),
    ] {
        let a = post(&app, "/api/v1/jobs", req.clone()).await.1["data"]["id"].as_str().unwrap().to_string();
        let b = post(&app, "/api/v1/jobs", req.clone()).await.1["data"]["id"].as_str().unwrap().to_string();
        assert_ne!(a, b);
        let ra = wait_job(&app, &a, LIMIT).await;
        let rb = wait_job(&app, &b, LIMIT).await;
        assert_eq!(ra["state"], "done", "{req}");
        assert_eq!(ra["result"], rb["result"], "{req}");
    }
}

#[tokio::test]
async fn cancelled_jobs_are_partial_and_stay_cancelled() {
    // One worker: the rolling job occupies it while the match waits.
    let app = app_with(small_dataset(), 1);
    let (_, long) = post(&app, "/api/v1/jobs", json!({ "kind": "rolling_predict", "n_trees": 50 })).await;
    let long = long["data"]["id"].as_str().unwrap().to_string();
    let motif = json!({ "k": 4, "edges": [[0, 1], [0, 2], [1, 3], [2, 3]] });
    let (_, queued) = post(&app, "/api/v1/jobs", json!({ "kind": "match", "motif": motif })).await;
    let queued = queued["data"]["id"].as_str().unwrap().to_string();

    let (status, body) = call(&app, Method::DELETE, &format!("/api/v1/jobs/{queued}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["data"]["state"], "cancelled");
    assert_eq!(body["data"]["partial"], true);

    let (_, body) = call(&app, Method::DELETE, &format!("/api/v1/jobs/{long}"), None).await;
    assert!(["running", "queued", "cancelled"].contains(&body["data"]["state"].as_str().unwrap()));
    let long_final = wait_job(&app, &long, LIMIT).await;
    assert_eq!(long_final["state"], "cancelled");
    assert_eq!(long_final["partial"], true);
    let p = long_final["progress"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&p));

    // Terminal states are final, even after the worker frees up.
    tokio::time::sleep(Duration::from_millis(100)).await;
    let (_, again) = get(&app, &format!("/api/v1/jobs/{queued}")).await;
    assert_eq!(again["data"]["state"], "cancelled");
    assert_eq!(again["data"]["result"], serde_json::Value::Null);
}

#[test]
fn cancelled_runs_report_partial_results() {
    let dataset = small_dataset();
    let ctrl = RunControl::new();
    ctrl.cancel();
    let motif = Motif::new(3, &[(0, 1), (1, 2)]).unwrap();
    for req in [
        JobRequest::Census { k: 3, date: None, budget: None },
        JobRequest::Match { motif, date: None, max_sets: None },
        JobRequest::Importance { date: None, max_len: None, max_paths: None },
        JobRequest::RollingPredict { width_months: 3, stride_months: 3, n_trees: Some(5) },
    ] {
        let out = run_job(&dataset, &req, &ctrl).unwrap();
        assert!(out.cancelled && out.partial, "{}", req.kind());
    }
}

#[tokio::test]
async fn progress_never_decreases() {
    let app = app_with(small_dataset(), 1);
    let (_, body) = post(&app, "/api/v1/jobs", json!({ "kind": "rolling_predict", "n_trees": 20 })).await;
    let id = body["data"]["id"].as_str().unwrap().to_string();
    let mut last = 0.0;
    loop {
        let (_, s) = get(&app, &format!("/api/v1/jobs/{id}")).await;
        let p = s["data"]["progress"].as_f64().unwrap();
        assert!(p >= last, "{p} < {last}");
        last = p;
        if s["data"]["state"] == "done" {
            break;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    assert_eq!(last, 1.0);
}

#[tokio::test]
async fn bad_job_requests() {
    let app = app_with(small_dataset(), 1);
    let (status, body) = post(&app, "/api/v1/jobs", json!({ "kind": "bake" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "BadRequest");
    let (status, body) = post(&app, "/api/v1/jobs", json!({ "kind": "match", "motif": { "k": 3, "edges": [[0, 1]] } })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "BadRequest");
    // Domain errors inside a run surface as a failed job.
    let (_, body) = post(&app, "/api/v1/jobs", json!({ "kind": "census", "k": 9 })).await;
    let failed = wait_job(&app, body["data"]["id"].as_str().unwrap(), LIMIT).await;
    assert_eq!(failed["state"], "failed");
    assert!(failed["error"].as_str().unwrap().starts_with("MotifSize"));
}
