//! HTTP/JSON front end over the elicitation engine.

mod error;
mod store;

pub use error::ApiError;
pub use store::{ApiSession, SessionStore, StoredSession};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use gavf_core::elicitation::{Mode, Relaxation, Session, SessionConfig, SessionStatus};
use gavf_core::model::{check_acyclic, parse_net, NetDocument};
use gavf_core::ranking::{
    items_from_documents, load_items_csv, load_items_path, HardConstraint, ItemDocument, ItemTable,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use tower_http::cors::CorsLayer;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub snapshot_dir: Option<PathBuf>,
    /// Item files that `items_ref` may name, by path or file name.
    pub items_allow: Vec<PathBuf>,
    pub round_cap: usize,
    pub default_k: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            snapshot_dir: None,
            items_allow: Vec::new(),
            round_cap: gavf_core::elicitation::DEFAULT_ROUND_CAP,
            default_k: gavf_core::elicitation::DEFAULT_K,
        }
    }
}

pub struct AppState {
    pub config: ServiceConfig,
    pub store: SessionStore,
}

impl AppState {
    /// Loads persisted sessions when a snapshot directory is configured.
    pub fn new(config: ServiceConfig) -> std::io::Result<Self> {
        let store = match &config.snapshot_dir {
            Some(dir) => SessionStore::load(dir.clone())?,
            None => SessionStore::new(None),
        };
        Ok(Self { config, store })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/nets/validate", post(validate))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/feedback", post(feedback))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(config)?);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// Bodies are parsed by hand so every JSON problem is a 400.
fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("MalformedJson", e.to_string()))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ApiError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    version: &'static str,
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok",
        version: VERSION,
    })
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    pub acyclic: bool,
    pub diagnostics: Vec<String>,
}

pub fn validate_document(value: serde_json::Value) -> ValidationReport {
    let invalid = |diagnostics| ValidationReport {
        valid: false,
        acyclic: false,
        diagnostics,
    };
    let doc: NetDocument = match serde_json::from_value(value) {
        Ok(doc) => doc,
        Err(e) => return invalid(vec![format!("malformed document: {e}")]),
    };
    let net = match parse_net(&doc) {
        Ok(net) => net,
        Err(e) => return invalid(e.violations.iter().map(ToString::to_string).collect()),
    };
    let report = check_acyclic(&net);
    let diagnostics = report
        .witness_names(&net)
        .map(|w| vec![format!("cycle through {}", w.join(" -> "))])
        .unwrap_or_default();
    ValidationReport {
        valid: true,
        acyclic: report.acyclic,
        diagnostics,
    }
}

async fn validate(body: Bytes) -> Result<Json<ValidationReport>, ApiError> {
    let value: serde_json::Value = parse_body(&body)?;
    Ok(Json(validate_document(value)))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum InlineItems {
    Documents(Vec<ItemDocument>),
    Csv(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    net: NetDocument,
    #[serde(default)]
    items: Option<InlineItems>,
    #[serde(default)]
    items_ref: Option<String>,
    #[serde(default)]
    hard: Vec<HardConstraint>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    mode: Option<Mode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedId {
    pub rank: usize,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionResponse {
    pub session_id: String,
    pub topk: Vec<RankedId>,
    pub debug_scores: Vec<String>,
    pub status: SessionStatus,
    pub round: usize,
    pub relaxation_applied: bool,
    pub relaxations: Vec<Relaxation>,
    pub constraints_added: usize,
}

fn respond(session: &Session) -> SessionResponse {
    let view = session.view();
    // the most recent round that received a pick
    let last = session.rounds().iter().rev().find(|r| r.chosen.is_some());
    SessionResponse {
        session_id: view.session_id,
        topk: view
            .topk
            .into_iter()
            .enumerate()
            .map(|(i, id)| RankedId { rank: i + 1, id })
            .collect(),
        debug_scores: view.debug_scores,
        status: view.status,
        round: view.round_count,
        relaxation_applied: last.is_some_and(|r| r.relaxation_applied),
        relaxations: last.map(|r| r.relaxations.clone()).unwrap_or_default(),
        constraints_added: last.map_or(0, |r| r.constraints_added),
    }
}

fn resolve_items_ref(config: &ServiceConfig, name: &str) -> Option<PathBuf> {
    config
        .items_allow
        .iter()
        .find(|p| p.to_str() == Some(name) || p.file_name().and_then(|f| f.to_str()) == Some(name))
        .cloned()
}

fn load_request_items(
    config: &ServiceConfig,
    request: &CreateRequest,
    net: &gavf_core::model::TcpNet,
) -> Result<ItemTable, ApiError> {
    let bad_items =
        |e: gavf_core::ranking::ItemError| ApiError::bad_request("InvalidItems", e.to_string());
    match (&request.items, &request.items_ref) {
        (Some(_), Some(_)) => Err(ApiError::bad_request(
            "InvalidItems",
            "give either items or items_ref, not both",
        )),
        (None, None) => Err(ApiError::bad_request(
            "InvalidItems",
            "items or items_ref is required",
        )),
        (Some(InlineItems::Documents(docs)), None) => {
            items_from_documents(docs, net.variables(), "inline").map_err(bad_items)
        }
        (Some(InlineItems::Csv(text)), None) => {
            load_items_csv(text, net.variables(), "inline").map_err(bad_items)
        }
        (None, Some(name)) => {
            let path = resolve_items_ref(config, name).ok_or_else(|| {
                ApiError::bad_request(
                    "ItemsRefNotAllowed",
                    format!("`{name}` is not allow-listed"),
                )
            })?;
            load_items_path(&path, net.variables()).map_err(bad_items)
        }
    }
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionResponse>), ApiError> {
    let request: CreateRequest = parse_body(&body)?;
    blocking(move || {
        let net = parse_net(&request.net).map_err(|e| {
            let mut err = ApiError::bad_request("InvalidNet", e.to_string());
            err.hints = e.violations.iter().map(ToString::to_string).collect();
            err
        })?;
        let items = load_request_items(&state.config, &request, &net)?;
        let config = SessionConfig {
            k: request.k.unwrap_or(state.config.default_k),
            round_cap: state.config.round_cap,
            mode: request.mode.unwrap_or(Mode::Ga),
        };
        let id = state.store.fresh_id();
        let session = Session::start(id, net, &items, &request.hard, config)?;
        let api = ApiSession {
            created_at: SessionStore::now(),
            session,
        };
        state
            .store
            .persist(&api)
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let response = respond(&api.session);
        state.store.insert(api);
        Ok((StatusCode::CREATED, Json(response)))
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeedbackRequest {
    chosen: String,
}

async fn feedback(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SessionResponse>, ApiError> {
    let handle = state
        .store
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&id))?;
    let request: FeedbackRequest = parse_body(&body)?;
    blocking(move || {
        let mut api = handle
            .lock()
            .map_err(|e| ApiError::internal(e.to_string()))?;
        api.session.feedback(&request.chosen)?;
        state
            .store
            .persist(&api)
            .map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(Json(respond(&api.session)))
    })
    .await
}

async fn get_session(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
) -> Result<Json<StoredSession>, ApiError> {
    let handle = state
        .store
        .get(&id)
        .ok_or_else(|| ApiError::not_found(&id))?;
    // a feedback request may hold the lock for a whole solve
    blocking(move || {
        let api = handle
            .lock()
            .map_err(|e| ApiError::internal(e.to_string()))?;
        Ok(Json(api.stored()))
    })
    .await
}
