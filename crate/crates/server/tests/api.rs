use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use unsyn_core::engine::EngineConfig;
use unsyn_core::fixtures;
use unsyn_server::{router, AppState};

fn app() -> axum::Router {
    router(Arc::new(AppState::new(EngineConfig::default(), 1, None)), None)
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn start(app: &axum::Router, spec: &str) -> (String, Value) {
    let (status, v) = call(app, "POST", "/api/session", Some(json!({ "spec": spec }))).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    (v["session_id"].as_str().unwrap().to_string(), v["snapshot"].clone())
}

/// Every output false except the named region.
fn go_to(snapshot: &Value, inputs: &Value, region: &str) -> Value {
    let mut m = BTreeMap::new();
    for (k, _) in snapshot.as_object().unwrap() {
        if inputs.get(k).is_none() {
            m.insert(k.clone(), k == region);
        }
    }
    json!({ "outputs": m })
}

#[tokio::test]
async fn entering_kitchen_is_explained_by_avoid_kitchen() {
    let app = app();
    let (id, snap) = start(&app, fixtures::FOLLOW_ME).await;
    assert_eq!(snap["v"], 1);
    assert_eq!(snap["mode"], "counterstrategy");
    assert_eq!(snap["pending_inputs"]["t_kitchen"], true);
    assert_eq!(snap["goal"]["text"], "Follow me.");
    let (status, v) = call(
        &app,
        "POST",
        &format!("/api/session/{id}/move"),
        Some(go_to(&snap["state"], &snap["pending_inputs"], "kitchen")),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["accepted"], false);
    let texts: Vec<&str> = v["core"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["text"].as_str().unwrap())
        .collect();
    assert_eq!(texts, vec!["Avoid the kitchen."]);
    assert_eq!(v["snapshot"]["history"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn dry_run_does_not_advance() {
    let app = app();
    let (id, snap) = start(&app, fixtures::HALLWAY_LIVELOCK).await;
    let mv = go_to(&snap["state"], &snap["pending_inputs"], "start");
    let mut mv = mv;
    mv["outputs"]["camera"] = json!(true);
    let (_, v) = call(
        &app,
        "POST",
        &format!("/api/session/{id}/move?dry=true"),
        Some(mv.clone()),
    )
    .await;
    assert_eq!(v["accepted"], true);
    assert_eq!(v["snapshot"], snap);
    let (_, after) = call(&app, "GET", &format!("/api/session/{id}"), None).await;
    assert_eq!(after, snap);
    let (_, v) = call(&app, "POST", &format!("/api/session/{id}/move"), Some(mv)).await;
    assert_eq!(v["accepted"], true);
    assert_eq!(v["snapshot"]["history"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn camera_off_is_rejected_with_camera_statement() {
    let app = app();
    let (id, snap) = start(&app, fixtures::HALLWAY_LIVELOCK).await;
    let mv = go_to(&snap["state"], &snap["pending_inputs"], "start");
    let (_, v) = call(&app, "POST", &format!("/api/session/{id}/move"), Some(mv)).await;
    assert_eq!(v["accepted"], false);
    assert_eq!(v["core"][0]["text"], "Always activate the camera");
    assert_eq!(v["core"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn deadlock_session_rejects_all_moves() {
    let app = app();
    let (id, snap) = start(&app, fixtures::HALLWAY_DEADLOCK).await;
    assert_eq!(snap["state"]["r5"], true);
    assert_eq!(snap["pending_inputs"]["person"], true);
    for region in ["r4", "r5", "r6"] {
        let mut mv = go_to(&snap["state"], &snap["pending_inputs"], region);
        mv["outputs"]["camera"] = json!(true);
        let (_, v) = call(&app, "POST", &format!("/api/session/{id}/move?dry=true"), Some(mv)).await;
        assert_eq!(v["accepted"], false);
        let ids: Vec<u64> = v["core"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e["id"].as_u64().unwrap())
            .collect();
        assert_eq!(ids, vec![2, 3], "{region}");
    }
}

#[tokio::test]
async fn errors() {
    let app = app();
    let (status, v) = call(&app, "GET", "/api/session/ffff", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(v["v"], 1);
    let (status, _) = call(&app, "POST", "/api/session", Some(json!({ "spec": "[OUTPUT]\n(" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/api/session", Some(json!({}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (id, _) = start(&app, fixtures::HALLWAY_LIVELOCK).await;
    let (status, _) = call(
        &app,
        "POST",
        &format!("/api/session/{id}/move"),
        Some(json!({ "outputs": { "nowhere": true } })),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn maps() {
    let app = app();
    let (status, v) = call(&app, "GET", "/api/map/hospital", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["regions"].as_array().unwrap().len(), 8);
    let (status, v) = call(&app, "GET", "/api/map/follow_me", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["adjacency"].as_array().unwrap().len() >= 7);
    let (id, _) = start(&app, fixtures::HALLWAY_DEADLOCK).await;
    let (status, v) = call(&app, "GET", &format!("/api/map/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["regions"][0], "start");
    let (status, _) = call(&app, "GET", "/api/map/nothing", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
