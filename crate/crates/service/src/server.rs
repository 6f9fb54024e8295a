//! HTTP/JSON interface over interactive sessions, with a server-sent event
//! stream of firing reports per session.

use std::collections::HashMap;
use std::convert::Infallible;
use std::sync::{Arc, Mutex, MutexGuard};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use bldd_core::gwt::render_feature;
use bldd_core::mapping::{pn_to_scenarios, scenarios_to_feature, EnumerationOptions, FeatureMeta};
use bldd_core::petri::{parse_pnml, PetriNet};
use bldd_core::runtime::MockFixture;
use bldd_core::session::{
    create_session, mock_factory, transition_constructs, FiringReport, Session, SessionPolicy, SessionState,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::broadcast;
use tokio_stream::wrappers::BroadcastStream;
use tokio_stream::{Stream, StreamExt};
use tower_http::cors::CorsLayer;

use crate::config::ServerConfig;
use crate::error::ApiError;
use crate::fixtures::{FixtureKind, FixtureStore};

/// Buffered events per session before a slow stream reader is cut off.
const EVENT_BUFFER: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionHandle {
    pub session_id: String,
    /// RFC 3339, UTC.
    pub created_at: String,
}

#[derive(Debug, Clone)]
enum SessionEvent {
    Firing(Box<FiringReport>),
    Reset(Box<SessionState>),
}

struct SessionEntry {
    handle: SessionHandle,
    model: String,
    session: Mutex<Session>,
    events: broadcast::Sender<SessionEvent>,
}

impl SessionEntry {
    fn lock(&self) -> MutexGuard<'_, Session> {
        self.session.lock().unwrap_or_else(|e| e.into_inner())
    }
}

pub struct AppState {
    config: ServerConfig,
    store: FixtureStore,
    sessions: Mutex<HashMap<String, Arc<SessionEntry>>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Self {
        Self {
            store: FixtureStore::new(&config.fixtures_dir),
            config,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    fn sessions(&self) -> MutexGuard<'_, HashMap<String, Arc<SessionEntry>>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn entry(&self, id: &str) -> Result<Arc<SessionEntry>, ApiError> {
        self.sessions()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::session_not_found(id))
    }

    fn load_net(&self, name: &str) -> Result<PetriNet, ApiError> {
        Ok(parse_pnml(&self.store.read(FixtureKind::Model, name)?)?)
    }

    fn load_sut(&self, name: &str) -> Result<MockFixture, ApiError> {
        let text = self.store.read(FixtureKind::Sut, name)?;
        MockFixture::from_json(&text)
            .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_sut", e.to_string()))
    }

    /// Drops every session, which ends their event streams.
    pub fn close_all_sessions(&self) {
        self.sessions().clear();
    }
}

pub fn router(config: ServerConfig) -> Router {
    router_with_state(Arc::new(AppState::new(config)))
}

pub fn router_with_state(state: Arc<AppState>) -> Router {
    let cors = state.config.cors;
    let app = Router::new()
        .route("/models", get(list_models))
        .route("/models/{name}", get(get_model))
        .route("/models/{name}/gwt", get(model_gwt))
        .route("/sessions", post(create).get(list_sessions))
        .route("/sessions/{id}", get(get_session).delete(delete_session))
        .route("/sessions/{id}/state", get(get_state))
        .route("/sessions/{id}/fire", post(fire))
        .route("/sessions/{id}/reset", post(reset))
        .route("/sessions/{id}/events", get(events))
        .fallback(not_found)
        .method_not_allowed_fallback(method_not_allowed)
        .with_state(state);
    if cors {
        app.layer(CorsLayer::permissive())
    } else {
        app
    }
}

/// Serves until Ctrl-C. Fails when the address cannot be bound.
pub async fn serve(config: ServerConfig) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    let state = Arc::new(AppState::new(config));
    let app = router_with_state(state.clone());
    axum::serve(listener, app)
        .with_graceful_shutdown(async move {
            let _ = tokio::signal::ctrl_c().await;
            state.close_all_sessions();
        })
        .await
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

async fn not_found() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(
        StatusCode::METHOD_NOT_ALLOWED,
        "method_not_allowed",
        "method not allowed on this endpoint",
    )
}

async fn list_models(State(state): State<Arc<AppState>>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(state.store.catalog()?))
}

async fn get_model(
    State(state): State<Arc<AppState>>,
    Path(name): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let net = state.load_net(&name)?;
    let constructs = transition_constructs(&net);
    Ok(Json(json!({ "name": name, "net": net, "constructs": constructs })))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GwtQuery {
    loop_bound: Option<usize>,
    max_scenarios: Option<usize>,
    role: Option<String>,
    request: Option<String>,
    benefit: Option<String>,
}

async fn model_gwt(
    State(state): State<Arc<AppState>>,
    Path(name): Path<String>,
    query: Result<Query<GwtQuery>, axum::extract::rejection::QueryRejection>,
) -> Result<impl IntoResponse, ApiError> {
    let Query(query) = query.map_err(|e| ApiError::bad_request(e.body_text()))?;
    let net = state.load_net(&name)?;
    let defaults = EnumerationOptions::default();
    let opts = EnumerationOptions {
        loop_bound: query.loop_bound.unwrap_or(defaults.loop_bound),
        max_scenarios: query.max_scenarios.unwrap_or(defaults.max_scenarios),
    };
    let traces = pn_to_scenarios(&net, opts)?;
    let meta = FeatureMeta {
        name: name.clone(),
        role: query.role.unwrap_or_default(),
        request: query.request.unwrap_or_default(),
        benefit: query.benefit.unwrap_or_default(),
    };
    let feature = render_feature(&scenarios_to_feature(&traces, &net, &meta));
    Ok(Json(
        json!({ "name": name, "scenarios": traces.len(), "feature": feature }),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    model: String,
    bindings: String,
    sut: String,
    #[serde(default)]
    advance_on_failure: bool,
}

#[derive(Debug, Serialize)]
struct Created {
    #[serde(flatten)]
    handle: SessionHandle,
    model: String,
    state: SessionState,
}

async fn create(State(state): State<Arc<AppState>>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let request: CreateRequest = parse_body(&body)?;
    if state.sessions().len() >= state.config.max_sessions {
        return Err(too_many(state.config.max_sessions));
    }
    let net = state.load_net(&request.model)?;
    let manifest = state.store.read(FixtureKind::Bindings, &request.bindings)?;
    let sut = state.store.read(FixtureKind::Sut, &request.sut)?;
    let manifest_name = format!("{}{}", request.bindings, FixtureKind::Bindings.suffix());
    let policy = SessionPolicy {
        advance_on_failure: request.advance_on_failure,
    };
    let session = create_session(net, &manifest, &manifest_name, &sut, policy)?;
    let initial = session.state();
    let handle = SessionHandle {
        session_id: uuid::Uuid::new_v4().to_string(),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
    };
    let (events, _) = broadcast::channel(EVENT_BUFFER);
    let entry = Arc::new(SessionEntry {
        handle: handle.clone(),
        model: request.model.clone(),
        session: Mutex::new(session),
        events,
    });
    {
        // Checked again under the lock: loading ran without it.
        let mut sessions = state.sessions();
        if sessions.len() >= state.config.max_sessions {
            return Err(too_many(state.config.max_sessions));
        }
        sessions.insert(handle.session_id.clone(), entry);
    }
    let created = Created {
        handle,
        model: request.model,
        state: initial,
    };
    Ok((StatusCode::CREATED, Json(created)))
}

fn too_many(limit: usize) -> ApiError {
    ApiError::new(
        StatusCode::TOO_MANY_REQUESTS,
        "too_many_sessions",
        format!("the server holds at most {limit} sessions; delete one first"),
    )
    .with_details(json!({ "max_sessions": limit }))
}

#[derive(Debug, Serialize)]
struct SessionSummary {
    #[serde(flatten)]
    handle: SessionHandle,
    model: String,
    log_length: usize,
}

async fn list_sessions(State(state): State<Arc<AppState>>) -> Json<Vec<SessionSummary>> {
    let entries: Vec<Arc<SessionEntry>> = state.sessions().values().cloned().collect();
    let mut out: Vec<SessionSummary> = entries
        .iter()
        .map(|e| SessionSummary {
            handle: e.handle.clone(),
            model: e.model.clone(),
            log_length: e.lock().log().len(),
        })
        .collect();
    out.sort_by(|a, b| (&a.handle.created_at, &a.handle.session_id).cmp(&(&b.handle.created_at, &b.handle.session_id)));
    Json(out)
}

async fn get_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let entry = state.entry(&id)?;
    let session = entry.lock();
    Ok(Json(json!({
        "session_id": entry.handle.session_id,
        "created_at": entry.handle.created_at,
        "model": entry.model,
        "policy": session.policy(),
        "state": session.state(),
    })))
}

async fn get_state(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    let entry = state.entry(&id)?;
    let current = entry.lock().state();
    Ok(Json(current))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FireRequest {
    transition: String,
}

async fn fire(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<FiringReport>, ApiError> {
    let request: FireRequest = parse_body(&body)?;
    let entry = state.entry(&id)?;
    // Steps may run external commands, so firing leaves the async workers.
    let report = tokio::task::spawn_blocking(move || {
        let mut session = entry.lock();
        let report = session.fire(&request.transition)?;
        // Sent under the session lock so stream order is log order.
        let _ = entry.events.send(SessionEvent::Firing(Box::new(report.clone())));
        Ok::<_, ApiError>(report)
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    Ok(Json(report))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResetRequest {
    /// Switch to another system-under-test fixture before resetting.
    sut: Option<String>,
}

async fn reset(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SessionState>, ApiError> {
    let request: ResetRequest = if body.is_empty() {
        ResetRequest::default()
    } else {
        parse_body(&body)?
    };
    let entry = state.entry(&id)?;
    let factory = match &request.sut {
        Some(name) => Some(mock_factory(state.load_sut(name)?)),
        None => None,
    };
    let mut session = entry.lock();
    if let Some(factory) = factory {
        session.set_sut_factory(factory);
    }
    session.reset();
    let fresh = session.state();
    let _ = entry.events.send(SessionEvent::Reset(Box::new(fresh.clone())));
    Ok(Json(fresh))
}

async fn delete_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    let entry = state
        .sessions()
        .remove(&id)
        .ok_or_else(|| ApiError::session_not_found(&id))?;
    let log_length = entry.lock().log().len();
    Ok(Json(
        json!({ "session_id": id, "deleted": true, "log_length": log_length }),
    ))
}

fn firing_event(report: &FiringReport) -> Event {
    Event::default()
        .event("firing")
        .json_data(report)
        .expect("reports serialize")
}

fn to_sse(event: SessionEvent) -> Event {
    match event {
        SessionEvent::Firing(report) => firing_event(&report),
        SessionEvent::Reset(state) => Event::default()
            .event("reset")
            .json_data(&*state)
            .expect("states serialize"),
    }
}

/// Replays the log so far, then follows live firings until the session is
/// deleted. A reader that falls too far behind is disconnected.
async fn events(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ApiError> {
    let entry = state.entry(&id)?;
    let (backlog, receiver) = {
        let session = entry.lock();
        (
            session.log().iter().map(firing_event).collect::<Vec<_>>(),
            entry.events.subscribe(),
        )
    };
    drop(entry);
    let live = BroadcastStream::new(receiver).map_while(|event| event.ok().map(to_sse));
    let stream = tokio_stream::iter(backlog).chain(live).map(Ok);
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}
