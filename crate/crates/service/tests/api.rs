mod common;

use std::collections::{BTreeMap, BTreeSet};

use axum::http::{Method, StatusCode};
use serde_json::{json, Value};

use common::*;

#[tokio::test]
async fn health_reports_version_and_fingerprint() {
    let dataset = small_dataset();
    let fp = dataset.network.fingerprint();
    let app = app_with(dataset, 1);
    let (status, body) = get(&app, "/api/v1/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["schema_version"], 1);
    assert_eq!(body["fingerprint"], fp);
    assert_eq!(body["data"]["version"], env!("CARGO_PKG_VERSION"));
}

#[tokio::test]
async fn sessions_are_created_and_unknown_ids_give_404() {
    let app = shared_app();
    let (status, body) = post(&app, "/api/v1/sessions", json!({ "date": "2015-06-01" })).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = body["data"]["id"].as_str().unwrap();
    assert_eq!(body["data"]["date"], "2015-06-01");
    assert_eq!(body["data"]["revision"], 0);
    let (status, again) = get(&app, &format!("/api/v1/sessions/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again["data"]["fingerprint"], body["data"]["fingerprint"]);

    let (status, body) = get(&app, "/api/v1/sessions/nope").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "UnknownSession");
    let (status, body) = post(&app, "/api/v1/sessions/nope/edits", json!({ "op": "cut", "guarantor": "a", "borrower": "b" })).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "UnknownSession");
    let (status, body) = get(&app, "/api/v1/jobs/job-999").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "UnknownJob");
    let (status, body) = get(&app, "/api/v1/no/such/route").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "NoRoute");
}

async fn session_view(app: &axum::Router, id: &str) -> Value {
    let (status, body) = get(app, &format!("/api/v1/communities?session={id}")).await;
    assert_eq!(status, StatusCode::OK);
    body["data"].clone()
}

#[tokio::test]
async fn reassigning_a_non_spanner_is_rejected() {
    let app = shared_app();
    let id = new_session(&app).await;
    let view = session_view(&app, &id).await;
    let spanners: BTreeSet<&str> = view["spanners"].as_array().unwrap().iter().map(|s| s["node"].as_str().unwrap()).collect();
    let labels = view["labels"].as_object().unwrap();
    let (node, label) = labels.iter().find(|(n, _)| !spanners.contains(n.as_str())).expect("an interior node");
    let other = labels.values().find(|l| *l != label).unwrap();
    let before = get(&app, &format!("/api/v1/sessions/{id}")).await.1;

    let (status, body) = post(&app, &format!("/api/v1/sessions/{id}/edits"), json!({ "op": "reassign", "node": node, "target": other })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&body, "NotASpanner");
    let after = get(&app, &format!("/api/v1/sessions/{id}")).await.1;
    assert_eq!(before["data"]["fingerprint"], after["data"]["fingerprint"]);
    assert_eq!(after["data"]["revision"], 0);
}

#[tokio::test]
async fn merging_adjacent_communities_returns_the_new_treemap() {
    let app = shared_app();
    let id = new_session(&app).await;
    let view = session_view(&app, &id).await;
    let blocks = view["stats"].as_array().unwrap().len();
    let s = &view["spanners"][0];
    let (into, absorbed) = (s["community"].clone(), s["adjacent"][0].clone());

    let (status, body) = post(&app, &format!("/api/v1/sessions/{id}/edits"), json!({ "op": "merge", "into": into, "absorbed": absorbed })).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let data = &body["data"];
    assert_eq!(data["revision"], 1);
    assert_eq!(data["treemap"]["rects"].as_array().unwrap().len(), blocks - 1);
    assert_eq!(data["stats_delta"]["removed"], json!([absorbed]));
    let changed = data["stats_delta"]["changed"].as_array().unwrap();
    assert_eq!(changed.len(), 1);
    assert_eq!(changed[0]["community"], into);

    // The session's treemap endpoint now agrees with the edit response.
    let (_, tm) = get(&app, &format!("/api/v1/treemap?session={id}")).await;
    assert_eq!(tm["data"]["treemap"], data["treemap"]);
}

/// A scripted edit log mixing every edit kind, plus rejected edits.
async fn scripted_log(app: &axum::Router, id: &str) {
    let edits_uri = format!("/api/v1/sessions/{id}/edits");
    let edit = |body: Value| {
        let uri = edits_uri.clone();
        async move {
            let (status, resp) = post(app, &uri, body).await;
            assert_eq!(status, StatusCode::OK, "{resp}");
        }
    };
    let view = session_view(app, id).await;
    let s0 = view["spanners"][0].clone();
    edit(json!({ "op": "reassign", "node": s0["node"], "target": s0["adjacent"][0] })).await;
    let view = session_view(app, id).await;
    let s1 = view["spanners"].as_array().unwrap().last().unwrap().clone();
    edit(json!({ "op": "merge", "into": s1["community"], "absorbed": s1["adjacent"][0] })).await;
    let (_, snap) = get(app, "/api/v1/network/snapshot").await;
    let (e, e2) = (&snap["data"]["edges"][0], &snap["data"]["edges"][3]);
    edit(json!({ "op": "cut", "guarantor": e["guarantor"], "borrower": e["borrower"] })).await;
    edit(json!({ "op": "cut", "guarantor": e2["guarantor"], "borrower": e2["borrower"] })).await;
    edit(json!({ "op": "revert", "guarantor": e["guarantor"], "borrower": e["borrower"] })).await;
    edit(json!({ "op": "motif_edit", "motif": { "k": 3, "edges": [[0, 1], [1, 2]] }, "edit": { "op": "add_node", "attach": 1, "outgoing": false } })).await;
    edit(json!({ "op": "motif_edit", "edit": { "op": "add_node", "attach": 0, "outgoing": true } })).await;

    let view = session_view(app, id).await;
    let own = &view["labels"][s0["node"].as_str().unwrap()];
    let (status, body) = post(app, &edits_uri, json!({ "op": "reassign", "node": s0["node"], "target": own })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    let (status, body) = post(app, &edits_uri, json!({ "op": "cut", "guarantor": e["borrower"], "borrower": "no-such-firm" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&body, "UnknownEdge");
}

#[tokio::test]
async fn replaying_an_edit_log_reproduces_the_fingerprint() {
    let app = shared_app();
    let a = new_session(&app).await;
    scripted_log(&app, &a).await;
    let (_, summary) = get(&app, &format!("/api/v1/sessions/{a}")).await;
    let log = summary["data"]["log"].as_array().unwrap().clone();
    assert_eq!(log.len(), 7);
    assert_eq!(summary["data"]["revision"], 7);

    let b = new_session(&app).await;
    for op in &log {
        let (status, body) = post(&app, &format!("/api/v1/sessions/{b}/edits"), op.clone()).await;
        assert_eq!(status, StatusCode::OK, "{body}");
    }
    let (_, replayed) = get(&app, &format!("/api/v1/sessions/{b}")).await;
    assert_eq!(replayed["data"]["fingerprint"], summary["data"]["fingerprint"]);
    assert_eq!(replayed["data"]["cuts"], summary["data"]["cuts"]);
    assert_eq!(replayed["data"]["motif"], summary["data"]["motif"]);

    // Sessions are isolated: a fresh one still has no edits.
    let c = new_session(&app).await;
    let (_, fresh) = get(&app, &format!("/api/v1/sessions/{c}")).await;
    assert_eq!(fresh["data"]["revision"], 0);
    assert_ne!(fresh["data"]["fingerprint"], summary["data"]["fingerprint"]);
}

#[tokio::test]
async fn identical_gets_return_identical_payloads() {
    let app = shared_app();
    let (_, snap) = get(&app, "/api/v1/network/snapshot").await;
    let node = snap["data"]["edges"][0]["borrower"].as_str().unwrap().to_string();
    let community = {
        let (_, c) = get(&app, "/api/v1/communities").await;
        c["data"]["stats"][0]["community"].clone()
    };
    let uris = [
        "/api/v1/network/snapshot?date=2015-03-01".to_string(),
        "/api/v1/metrics".to_string(),
        "/api/v1/metrics?kind=pagerank&date=2015-03-01".to_string(),
        "/api/v1/metrics/histogram?kind=betweenness&bins=5".to_string(),
        "/api/v1/communities".to_string(),
        "/api/v1/treemap?measure=firms".to_string(),
        format!("/api/v1/radar/{community}"),
        "/api/v1/circles?maxlen=5".to_string(),
        format!("/api/v1/propagation/{node}?maxlen=6"),
        format!("/api/v1/sankey/{node}"),
        "/api/v1/evolution/diff?from=2014-01-01&to=2015-01-01".to_string(),
    ];
    for uri in &uris {
        let (s1, a) = get(&app, uri).await;
        let (s2, b) = get(&app, uri).await;
        assert_eq!(s1, StatusCode::OK, "{uri}: {a}");
        assert_eq!(s2, StatusCode::OK);
        assert_eq!(a, b, "{uri}");
        assert_eq!(a["fingerprint"], snap["fingerprint"]);
    }
}

#[tokio::test]
async fn read_payload_shapes() {
    let app = shared_app();
    let (_, m) = get(&app, "/api/v1/metrics?kind=kshell").await;
    let values = m["data"]["values"].as_object().unwrap();
    let (_, snap) = get(&app, "/api/v1/network/snapshot").await;
    assert_eq!(values.len(), snap["data"]["nodes"].as_array().unwrap().len());
    assert!(values.values().all(|v| v.as_f64().unwrap().fract() == 0.0));

    let (_, h) = get(&app, "/api/v1/metrics/histogram?kind=pagerank&bins=4").await;
    let bins = h["data"]["histogram"]["bins"].as_array().unwrap();
    assert_eq!(bins.len(), 4);
    let nodes: u64 = bins.iter().map(|b| b["nodes"].as_u64().unwrap()).sum();
    assert_eq!(nodes as usize, values.len());

    let (_, c) = get(&app, "/api/v1/circles").await;
    for kind in ["mutual", "revolving", "stars", "joint_liability"] {
        assert!(c["data"]["circles"][kind].is_array());
    }
    let (_, diff) = get(&app, "/api/v1/evolution/diff?from=2013-01-01&to=2016-06-01").await;
    assert!(!diff["data"]["added_edges"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn bad_parameters_get_structured_errors() {
    let app = shared_app();
    let (status, body) = get(&app, "/api/v1/metrics?kind=nope").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "UnknownMetric");
    let (status, body) = get(&app, "/api/v1/metrics?date=yesterday").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "BadRequest");
    let (status, body) = get(&app, "/api/v1/metrics/histogram").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "BadRequest");
    let (status, body) = get(&app, "/api/v1/metrics/histogram?kind=hub&bins=1").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&body, "BadBinCount");
    let (status, body) = get(&app, "/api/v1/evolution/diff?from=2015-01-01").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "BadRequest");
    let (status, body) = get(&app, "/api/v1/evolution/diff?from=2016-01-01&to=2015-01-01").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&body, "BadRange");
    let (status, body) = get(&app, "/api/v1/propagation/no-such-firm").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "UnknownNode");
    let (status, body) = get(&app, "/api/v1/radar/99999").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body, "UnknownCommunity");
    let (status, body) = get(&app, "/api/v1/metrics?date=1990-01-01").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&body, "EmptySnapshot");
    let (status, body) = call(&app, Method::POST, "/api/v1/sessions", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "BadRequest");
    let id = new_session(&app).await;
    let (status, body) = post(&app, &format!("/api/v1/sessions/{id}/edits"), json!({ "op": "explode" })).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body, "BadRequest");
    let (status, body) = post(&app, &format!("/api/v1/sessions/{id}/edits"), json!({ "op": "motif_edit", "edit": { "op": "remove_node", "slot": 0 } })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error_shape(&body, "NoMotif");
}

#[tokio::test]
async fn cutting_a_guarantee_empties_the_worked_example_paths_for_a() {
    let app = app_with(worked_example_dataset(), 1);
    let (_, before) = get(&app, "/api/v1/propagation/A").await;
    assert_eq!(before["data"]["paths"], json!([["A", "B", "C", "E"], ["A", "B", "D", "E"]]));
    let id = new_session(&app).await;
    let (status, body) = post(&app, &format!("/api/v1/sessions/{id}/edits"), json!({ "op": "cut", "guarantor": "B", "borrower": "A", "seed": "A" })).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["data"]["propagation"]["paths"], json!([]));
    assert_eq!(body["data"]["cuts"]["edges"], json!([["B", "A"]]));
    // Session-scoped reads see the cut; global reads do not.
    let (_, scoped) = get(&app, &format!("/api/v1/propagation/A?session={id}")).await;
    assert_eq!(scoped["data"]["paths"], json!([]));
    let (_, global) = get(&app, "/api/v1/propagation/A").await;
    assert_eq!(global, before);
    let (_, sankey) = get(&app, "/api/v1/sankey/B").await;
    let links: BTreeMap<String, f64> = sankey["data"]["links"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| (format!("{}>{}", l["source"].as_str().unwrap(), l["target"].as_str().unwrap()), l["value"].as_f64().unwrap()))
        .collect();
    assert_eq!(links.get("C>B"), Some(&200.0));
    assert_eq!(links.get("E>D"), Some(&500.0));
}

#[tokio::test]
async fn heatmap_grid_is_cached_and_bounded() {
    let app = app_with(small_dataset(), 1);
    let (status, a) = get(&app, "/api/v1/heatmap").await;
    assert_eq!(status, StatusCode::OK, "{a}");
    let grid = &a["data"]["grid"];
    let columns = grid["columns"].as_array().unwrap().len();
    assert!(columns > 0);
    for row in grid["cells"].as_array().unwrap() {
        assert_eq!(row.as_array().unwrap().len(), columns);
        for c in row.as_array().unwrap() {
            if let Some(p) = c.as_f64() {
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
    let (_, b) = get(&app, "/api/v1/heatmap").await;
    assert_eq!(a, b);
}
