use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use gavf_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::sync::Arc;
use tower::ServiceExt;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

fn flight() -> Value {
    serde_json::from_str(&fixture("flight.json")).unwrap()
}

fn app_with(config: ServiceConfig) -> Router {
    router(Arc::new(AppState::new(config).unwrap()))
}

fn app() -> Router {
    app_with(ServiceConfig::default())
}

async fn call_raw(app: &Router, method: Method, uri: &str, body: &str) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (
        status,
        serde_json::from_slice(&bytes).unwrap_or(Value::Null),
    )
}

async fn call(app: &Router, method: Method, uri: &str, body: Value) -> (StatusCode, Value) {
    let text = if body.is_null() {
        String::new()
    } else {
        body.to_string()
    };
    call_raw(app, method, uri, &text).await
}

fn flight_session(k: usize) -> Value {
    json!({ "net": flight(), "items": fixture("flight_outcomes.csv"), "k": k })
}

fn ids(response: &Value) -> Vec<String> {
    response["topk"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["id"].as_str().unwrap().to_string())
        .collect()
}

#[tokio::test]
async fn health() {
    let app = app();
    let (status, body) = call(&app, Method::GET, "/api/health", Value::Null).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body,
        json!({ "status": "ok", "version": env!("CARGO_PKG_VERSION") })
    );
    assert_eq!(
        call(&app, Method::GET, "/api/health", Value::Null).await.1,
        body
    );
}

#[tokio::test]
async fn validate_nets() {
    let app = app();
    let uri = "/api/nets/validate";
    let (status, body) = call(&app, Method::POST, uri, flight()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["valid"], true);
    assert_eq!(body["acyclic"], true);

    let cycle: Value = serde_json::from_str(&fixture("bad_cycle.json")).unwrap();
    let (status, body) = call(&app, Method::POST, uri, cycle).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        (body["valid"].clone(), body["acyclic"].clone()),
        (json!(true), json!(false))
    );
    assert!(body["diagnostics"][0].as_str().unwrap().contains("X"));

    let cpt_cycle = json!({
        "variables": [{ "name": "X", "domain": ["x1", "x2"] }],
        "cpts": [{ "variable": "X", "rows": [{ "given": {}, "order": [["x1", "x2"], ["x2", "x1"]] }] }]
    });
    let (status, body) = call(&app, Method::POST, uri, cpt_cycle).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["valid"], false);
    assert!(!body["diagnostics"].as_array().unwrap().is_empty());

    let (status, body) = call(&app, Method::POST, uri, json!({ "nodes": 3 })).await;
    assert_eq!(
        (status, body["valid"].clone()),
        (StatusCode::OK, json!(false))
    );
    let (status, _) = call_raw(&app, Method::POST, uri, "{ not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn create_session() {
    let app = app();
    let (status, body) = call(&app, Method::POST, "/api/sessions", flight_session(10)).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["session_id"], "s1");
    assert_eq!(body["status"], "active");
    assert_eq!(body["round"], 1);
    let ranks: Vec<u64> = body["topk"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["rank"].as_u64().unwrap())
        .collect();
    assert_eq!(ranks, (1..=10).collect::<Vec<_>>());
    assert_eq!(body["debug_scores"].as_array().unwrap().len(), 10);

    let (_, second) = call(&app, Method::POST, "/api/sessions", flight_session(10)).await;
    assert_eq!(second["session_id"], "s2");
    assert_eq!(ids(&second), ids(&body));

    let (status, session) = call(&app, Method::GET, "/api/sessions/s1", Value::Null).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(session["rounds"].as_array().unwrap().len(), 1);
    assert_eq!(session["status"], "active");
}

#[tokio::test]
async fn inline_item_documents() {
    let app = app();
    let items = json!([
        { "id": "a", "attributes": { "D": "1d", "A": "ba", "T": "day", "S": "1s", "C": "business" } },
        { "id": "b", "attributes": { "D": "2d", "A": "klm", "T": "day", "S": "0s", "C": "economy" } }
    ]);
    let (status, body) = call(
        &app,
        Method::POST,
        "/api/sessions",
        json!({ "net": flight(), "items": items }),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(ids(&body), ["a", "b"]);
}

#[tokio::test]
async fn create_errors() {
    let app = app();
    let post = |body: Value| {
        let app = app.clone();
        async move { call(&app, Method::POST, "/api/sessions", body).await }
    };
    assert_eq!(post(flight_session(1)).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(
        post(json!({ "net": flight() })).await.0,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        call_raw(&app, Method::POST, "/api/sessions", "[").await.0,
        StatusCode::BAD_REQUEST
    );
    let mut unknown_value = flight_session(10);
    unknown_value["items"] = json!("id,D,A,T,S,C\n1,1d,ba,noon,0s,economy\n");
    assert_eq!(post(unknown_value).await.0, StatusCode::BAD_REQUEST);

    let mut empty = flight_session(10);
    empty["hard"] = json!([{ "attribute": "T", "allowed": ["night"] }]);
    empty["items"] = json!("id,D,A,T,S,C\n1,1d,ba,day,0s,economy\n");
    let (status, body) = post(empty).await;
    assert_eq!(
        (status, body["error"].clone()),
        (StatusCode::UNPROCESSABLE_ENTITY, json!("EmptyItemSet"))
    );

    let inconsistent: Value = serde_json::from_str(&fixture("selector_cycle.json")).unwrap();
    let (status, body) =
        post(json!({ "net": inconsistent, "items": "id,A,B,C\n1,a1,b1,c1\n" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "BaseSystemInfeasible");
    assert!(!body["hints"].as_array().unwrap().is_empty());

    let cycle: Value = serde_json::from_str(&fixture("bad_cycle.json")).unwrap();
    let (status, _) = post(json!({ "net": cycle, "items": "id,X,Y\n1,x1,y1\n" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn feedback_rounds() {
    let app = app();
    let (_, created) = call(&app, Method::POST, "/api/sessions", flight_session(10)).await;
    let shown = ids(&created);
    let feedback = |id: &str, chosen: &str| {
        let (app, uri) = (app.clone(), format!("/api/sessions/{id}/feedback"));
        let body = json!({ "chosen": chosen });
        async move { call(&app, Method::POST, &uri, body).await }
    };

    let (status, body) = feedback("s1", "o99").await;
    assert_eq!(
        (status, body["error"].clone()),
        (
            StatusCode::UNPROCESSABLE_ENTITY,
            json!("ChosenNotDisplayed")
        )
    );
    assert_eq!(feedback("s9", &shown[0]).await.0, StatusCode::NOT_FOUND);
    assert_eq!(
        call(&app, Method::GET, "/api/sessions/s9", Value::Null)
            .await
            .0,
        StatusCode::NOT_FOUND
    );

    let (status, body) = feedback("s1", &shown[2]).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        (body["round"].clone(), body["status"].clone()),
        (json!(2), json!("active"))
    );
    assert_eq!(body["constraints_added"], 9);
    assert_eq!(ids(&body).len(), 10);

    let (_, snapshot) = call(&app, Method::GET, "/api/sessions/s1", Value::Null).await;
    assert_eq!(snapshot["rounds"].as_array().unwrap().len(), 2);
    assert_eq!(snapshot["rounds"][0]["chosen"], json!(shown[2]));

    let top = ids(&body)[0].clone();
    let (status, body) = feedback("s1", &top).await;
    assert_eq!(
        (status, body["status"].clone()),
        (StatusCode::OK, json!("converged"))
    );
    let (status, body) = feedback("s1", &top).await;
    assert_eq!(
        (status, body["error"].clone()),
        (StatusCode::CONFLICT, json!("NotActive"))
    );
    let (_, after) = call(&app, Method::GET, "/api/sessions/s1", Value::Null).await;
    assert_eq!(after["status"], "converged");
    assert_eq!(after["rounds"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn responses_are_deterministic() {
    let run = || async {
        let app = app();
        let (_, a) = call(&app, Method::POST, "/api/sessions", flight_session(10)).await;
        let pick = ids(&a)[4].clone();
        let uri = "/api/sessions/s1/feedback";
        let (_, b) = call(&app, Method::POST, uri, json!({ "chosen": pick })).await;
        let (_, mut c) = call(&app, Method::GET, "/api/sessions/s1", Value::Null).await;
        c.as_object_mut().unwrap().remove("created_at");
        (a, b, c)
    };
    assert_eq!(run().await, run().await);
}

#[tokio::test]
async fn items_ref_allow_list() {
    let app = app_with(ServiceConfig {
        items_allow: vec![fixture_path("flights.csv")],
        ..ServiceConfig::default()
    });
    let body = json!({ "net": flight(), "items_ref": "flights.csv" });
    let (status, created) = call(&app, Method::POST, "/api/sessions", body).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(ids(&created).len(), 10);
    let body = json!({ "net": flight(), "items_ref": "flight_outcomes.csv" });
    assert_eq!(
        call(&app, Method::POST, "/api/sessions", body).await.0,
        StatusCode::BAD_REQUEST
    );
}

#[tokio::test]
async fn snapshots_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        snapshot_dir: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    };
    let app = app_with(config.clone());
    let (_, created) = call(&app, Method::POST, "/api/sessions", flight_session(10)).await;
    let pick = ids(&created)[1].clone();
    let (_, next) = call(
        &app,
        Method::POST,
        "/api/sessions/s1/feedback",
        json!({ "chosen": pick }),
    )
    .await;
    let (_, before) = call(&app, Method::GET, "/api/sessions/s1", Value::Null).await;
    drop(app);

    let restarted = app_with(config);
    let (status, after) = call(&restarted, Method::GET, "/api/sessions/s1", Value::Null).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(after, before);
    let (_, fresh) = call(
        &restarted,
        Method::POST,
        "/api/sessions",
        flight_session(10),
    )
    .await;
    assert_eq!(fresh["session_id"], "s2");

    let top = ids(&next)[0].clone();
    let (status, body) = call(
        &restarted,
        Method::POST,
        "/api/sessions/s1/feedback",
        json!({ "chosen": top }),
    )
    .await;
    assert_eq!(
        (status, body["status"].clone()),
        (StatusCode::OK, json!("converged"))
    );
}
