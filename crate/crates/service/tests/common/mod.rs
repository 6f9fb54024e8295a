#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use bldd_core::petri::{parse_pnml, Arc, Marking, PetriNet, Place, Transition};
use bldd_oracle::{LabeledNet, RefMarking, RefNet};
use bldd_service::config::ServerConfig;
use bldd_service::server::router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_path(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn payment() -> PetriNet {
    parse_pnml(&fixture("payment.pnml")).unwrap()
}

pub fn bldd<P: AsRef<Path>>(args: &[P]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bldd"))
        .args(args.iter().map(AsRef::as_ref))
        .output()
        .expect("bldd runs")
}

pub fn code(output: &Output) -> i32 {
    output.status.code().expect("exited normally")
}

pub fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

pub fn app(max_sessions: usize) -> Router {
    let config = ServerConfig::new("127.0.0.1:0".parse().unwrap(), fixtures_dir(), max_sessions, false).unwrap();
    router(config)
}

pub async fn raw(app: &Router, method: Method, uri: &str, body: Option<&Value>) -> (StatusCode, String) {
    let mut request = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            request = request.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let response = app.clone().oneshot(request.body(body).unwrap()).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<&Value>) -> (StatusCode, Value) {
    let (status, text) = raw(app, method, uri, body).await;
    let value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{uri}: non-JSON body {text:?}: {e}"));
    (status, value)
}

/// Reference view of a net, built only from its public node and arc lists.
pub fn ref_net(net: &PetriNet) -> RefNet {
    let places: Vec<String> = net.places().iter().map(|p| p.id.clone()).collect();
    let transitions: Vec<String> = net.transitions().iter().map(|t| t.id.clone()).collect();
    let arcs: Vec<(String, String, u32)> = net
        .arcs()
        .iter()
        .map(|a| (a.source.clone(), a.target.clone(), a.weight))
        .collect();
    RefNet::new(&places, &transitions, &arcs)
}

pub fn to_ref(marking: &Marking) -> RefMarking {
    marking.marked_places().map(|(p, n)| (p.to_string(), n)).collect()
}

pub fn from_ref(marking: &RefMarking) -> Marking {
    marking.iter().map(|(p, n)| (p.clone(), *n)).collect()
}

pub fn labeled(net: &PetriNet) -> LabeledNet {
    LabeledNet {
        id: net.id().to_string(),
        places: net.places().iter().map(|p| (p.id.clone(), p.label.clone())).collect(),
        transitions: net
            .transitions()
            .iter()
            .map(|t| (t.id.clone(), t.label.clone()))
            .collect(),
        arcs: net
            .arcs()
            .iter()
            .map(|a| (a.source.clone(), a.target.clone()))
            .collect(),
    }
}

/// Engine net for a generated one, with a token on its source place.
pub fn from_labeled(net: &LabeledNet) -> PetriNet {
    let source = net
        .places
        .iter()
        .find(|(id, _)| !net.arcs.iter().any(|(_, t)| t == id))
        .map(|(id, _)| id.clone())
        .expect("generated nets have a source");
    PetriNet::new(
        net.id.clone(),
        net.places
            .iter()
            .map(|(id, l)| Place::new(id.clone(), l.clone()))
            .collect(),
        net.transitions
            .iter()
            .map(|(id, l)| Transition::new(id.clone(), l.clone()))
            .collect(),
        net.arcs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| Arc::new(format!("a{i}"), s.clone(), t.clone()))
            .collect(),
        Marking::single(source),
    )
    .unwrap()
}
