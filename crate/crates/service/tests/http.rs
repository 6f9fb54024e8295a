mod common;

use axum::http::{Method, StatusCode};
use axum::Router;
use bldd_core::gwt::parse_feature;
use bldd_core::session::FiringReport;
use common::*;
use serde_json::{json, Value};

const CARD_PATH: [&str; 7] = [
    "t_card",
    "t_fill_card",
    "t_confirm",
    "t_send_email",
    "t_check_inventory",
    "t_release",
    "t_close",
];

async fn new_session(app: &Router, sut: &str) -> String {
    let body = json!({"model": "payment", "bindings": "payment", "sut": sut});
    let (status, created) = call(app, Method::POST, "/sessions", Some(&body)).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    created["session_id"].as_str().unwrap().to_string()
}

async fn fire(app: &Router, id: &str, transition: &str) -> (StatusCode, Value) {
    call(
        app,
        Method::POST,
        &format!("/sessions/{id}/fire"),
        Some(&json!({ "transition": transition })),
    )
    .await
}

/// `(event name, data)` pairs of a finished event stream.
fn sse_events(text: &str) -> Vec<(String, Value)> {
    text.split("\n\n")
        .filter_map(|block| {
            let mut name = None;
            let mut data = None;
            for line in block.lines() {
                if let Some(v) = line.strip_prefix("event:") {
                    name = Some(v.trim().to_string());
                } else if let Some(v) = line.strip_prefix("data:") {
                    data = Some(serde_json::from_str(v.trim()).unwrap());
                }
            }
            Some((name?, data?))
        })
        .collect()
}

#[tokio::test]
async fn models_are_listed_by_kind() {
    let app = app(4);
    let (status, catalog) = call(&app, Method::GET, "/models", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(catalog["models"], json!(["payment", "review"]));
    assert_eq!(catalog["bindings"], json!(["payment"]));
    assert_eq!(catalog["suts"], json!(["budget", "payment", "payment_broken"]));

    let (status, model) = call(&app, Method::GET, "/models/payment", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(model["net"]["id"], "payment");
    assert_eq!(model["constructs"]["t_confirm"], "AndSplit");
}

#[tokio::test]
async fn model_gwt_is_feature_text() {
    let app = app(4);
    let (status, body) = call(&app, Method::GET, "/models/payment/gwt", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["scenarios"], 2);
    let ast = parse_feature(body["feature"].as_str().unwrap()).unwrap();
    assert_eq!(ast.scenarios.len(), 2);

    let (status, body) = call(&app, Method::GET, "/models/payment/gwt?max_scenarios=1", None).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "max_scenarios_exceeded");
    let (status, body) = call(&app, Method::GET, "/models/payment/gwt?loop_bound=x", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"]["code"], "bad_request");
}

#[tokio::test]
async fn fixture_names_are_checked() {
    let app = app(4);
    for (body, status, code) in [
        (
            json!({"model": "../payment", "bindings": "payment", "sut": "payment"}),
            400,
            "invalid_fixture_name",
        ),
        (
            json!({"model": "nosuch", "bindings": "payment", "sut": "payment"}),
            404,
            "fixture_not_found",
        ),
        (json!({"model": "payment", "bindings": "payment"}), 400, "bad_request"),
        (
            json!({"model": "payment", "bindings": "payment", "sut": "budget"}),
            201,
            "",
        ),
    ] {
        let (got, reply) = call(&app, Method::POST, "/sessions", Some(&body)).await;
        assert_eq!(got.as_u16(), status, "{body} -> {reply}");
        if !code.is_empty() {
            assert_eq!(reply["error"]["code"], code);
            assert!(reply["error"]["message"].is_string());
        }
    }
    let (status, reply) = call(&app, Method::GET, "/models/a.b", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{reply}");
}

#[tokio::test]
async fn session_lifecycle() {
    let app = app(4);
    let id = new_session(&app, "payment").await;
    let state_uri = format!("/sessions/{id}/state");

    let (status, first) = call(&app, Method::GET, &state_uri, None).await;
    assert_eq!(status, StatusCode::OK);
    let (_, second) = raw(&app, Method::GET, &state_uri, None).await;
    assert_eq!(first, serde_json::from_str::<Value>(&second).unwrap());
    assert_eq!(first["marking"], json!({"p_start": 1}));
    let enabled: Vec<&str> = first["enabled"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["id"].as_str().unwrap())
        .collect();
    assert_eq!(enabled, ["t_card", "t_slip"]);
    assert!(first["enabled"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["or_alternative"] == true));

    // A disabled transition is refused and leaves everything as it was.
    let (status, err) = fire(&app, &id, "t_release").await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["error"]["code"], "not_enabled");
    let (_, after) = call(&app, Method::GET, &state_uri, None).await;
    assert_eq!(after, first);

    let (status, err) = fire(&app, &id, "t_nosuch").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"]["code"], "unknown_transition");

    for t in CARD_PATH {
        let (status, report) = fire(&app, &id, t).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(report["advanced"], true, "{t}: {report}");
    }
    let (_, done) = call(&app, Method::GET, &state_uri, None).await;
    assert_eq!(done["completed"], true);
    assert_eq!(done["log_length"], 7);

    let (status, fresh) = call(&app, Method::POST, &format!("/sessions/{id}/reset"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fresh, first);

    let (status, list) = call(&app, Method::GET, "/sessions", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(list[0]["session_id"], id.as_str());

    let (status, _) = call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, err) = call(&app, Method::GET, &state_uri, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["error"]["code"], "session_not_found");
}

#[tokio::test]
async fn session_limit_is_429() {
    let app = app(2);
    let a = new_session(&app, "payment").await;
    new_session(&app, "payment").await;
    let body = json!({"model": "payment", "bindings": "payment", "sut": "payment"});
    let (status, err) = call(&app, Method::POST, "/sessions", Some(&body)).await;
    assert_eq!(status, StatusCode::TOO_MANY_REQUESTS);
    assert_eq!(err["error"]["code"], "too_many_sessions");
    assert_eq!(err["error"]["details"]["max_sessions"], 2);
    call(&app, Method::DELETE, &format!("/sessions/{a}"), None).await;
    new_session(&app, "payment").await;
}

#[tokio::test]
async fn malformed_requests_get_json_errors() {
    let app = app(4);
    let id = new_session(&app, "payment").await;
    for (method, uri, body) in [
        (
            Method::POST,
            format!("/sessions/{id}/fire"),
            Some(json!({"transitions": "t_card"})),
        ),
        (Method::POST, format!("/sessions/{id}/fire"), None),
        (
            Method::POST,
            format!("/sessions/{id}/reset"),
            Some(json!({"sut": "nope/"})),
        ),
        (Method::GET, "/nowhere".to_string(), None),
        (Method::PUT, "/models".to_string(), None),
    ] {
        let (status, err) = call(&app, method, &uri, body.as_ref()).await;
        assert!(status.is_client_error(), "{uri}: {status}");
        assert!(err["error"]["code"].is_string(), "{uri}: {err}");
    }
}

#[tokio::test]
async fn events_replay_then_follow_the_log() {
    let app = app(4);
    let id = new_session(&app, "payment").await;
    fire(&app, &id, "t_card").await;
    fire(&app, &id, "t_fill_card").await;

    // The stream is opened after two firings and stays open for more.
    let events_app = app.clone();
    let events_uri = format!("/sessions/{id}/events");
    let stream = tokio::spawn(async move { raw(&events_app, Method::GET, &events_uri, None).await });
    tokio::time::sleep(std::time::Duration::from_millis(100)).await;
    for t in &CARD_PATH[2..5] {
        fire(&app, &id, t).await;
    }
    let (status, _) = fire(&app, &id, "t_close").await;
    assert_eq!(status, StatusCode::CONFLICT, "refusals are not events");

    let (_, log) = call(&app, Method::GET, &format!("/sessions/{id}/state"), None).await;
    let log_length = log["log_length"].as_u64().unwrap() as usize;
    call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;

    let (status, text) = stream.await.unwrap();
    assert_eq!(status, StatusCode::OK);
    let events = sse_events(&text);
    assert_eq!(events.len(), log_length);
    assert!(events.iter().all(|(name, _)| name == "firing"));
    let fired: Vec<String> = events
        .iter()
        .map(|(_, data)| serde_json::from_value::<FiringReport>(data.clone()).unwrap().transition)
        .collect();
    assert_eq!(fired, CARD_PATH[..5]);
}

#[tokio::test]
async fn reset_is_announced_on_the_stream() {
    let app = app(4);
    let id = new_session(&app, "payment").await;
    let events_app = app.clone();
    let events_uri = format!("/sessions/{id}/events");
    let stream = tokio::spawn(async move { raw(&events_app, Method::GET, &events_uri, None).await });
    tokio::time::sleep(std::time::Duration::from_millis(100)).await;
    fire(&app, &id, "t_slip").await;
    call(&app, Method::POST, &format!("/sessions/{id}/reset"), None).await;
    call(&app, Method::DELETE, &format!("/sessions/{id}"), None).await;
    let names: Vec<String> = sse_events(&stream.await.unwrap().1)
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    assert_eq!(names, ["firing", "reset"]);
}
