//! HTTP API for the interactive game. Sessions live in memory and each one
//! handles a single request at a time.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;
use unsyn_core::engine::{CoreEntry, EngineConfig};
use unsyn_core::fixtures;
use unsyn_core::session::{Session, SessionError, Snapshot};
use unsyn_core::spec::{parse_spec, Span, Spec, StmtId};
use unsyn_core::workspace::{MapView, Workspace};

pub const API_VERSION: u32 = 1;

pub struct AppState {
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    cfg: EngineConfig,
    seed: u64,
    created: AtomicU64,
    /// Used when a session request carries no spec text.
    default_spec: Option<Arc<Spec>>,
}

impl AppState {
    pub fn new(cfg: EngineConfig, seed: u64, default_spec: Option<Spec>) -> Self {
        AppState {
            sessions: Mutex::new(HashMap::new()),
            cfg,
            seed,
            created: AtomicU64::new(0),
            default_spec: default_spec.map(Arc::new),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .lock()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no session {id}")))
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::NOT_FOUND,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: message.into(),
        }
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::MalformedMove(_) | SessionError::NoInitialState => ApiError::bad_request(e.to_string()),
            _ => ApiError::internal(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "v": API_VERSION, "error": self.message }))).into_response()
    }
}

#[derive(Debug, Default, Deserialize)]
pub struct NewSession {
    pub spec: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionCreated {
    pub v: u32,
    pub session_id: String,
    pub snapshot: Snapshot,
}

#[derive(Debug, Deserialize)]
pub struct MoveRequest {
    pub outputs: BTreeMap<String, bool>,
}

#[derive(Debug, Default, Deserialize)]
pub struct MoveQuery {
    #[serde(default)]
    pub dry: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreStatement {
    pub id: StmtId,
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MoveResponse {
    pub v: u32,
    pub accepted: bool,
    pub snapshot: Snapshot,
    pub core: Vec<CoreStatement>,
    pub notes: Vec<String>,
}

fn core_statements(core: &[CoreEntry]) -> Vec<CoreStatement> {
    core.iter()
        .map(|e| CoreStatement {
            id: e.ids[0],
            text: e.text.clone(),
            span: e.span,
        })
        .collect()
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, ApiError> + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn create_session(
    State(app): State<Arc<AppState>>,
    body: Option<Json<NewSession>>,
) -> Result<Json<SessionCreated>, ApiError> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let spec = match req.spec {
        Some(text) => Arc::new(parse_spec(&text).map_err(|e| ApiError::bad_request(e.to_string()))?),
        None => app
            .default_spec
            .clone()
            .ok_or_else(|| ApiError::bad_request("request has no spec and the server has no default"))?,
    };
    let n = app.created.fetch_add(1, Ordering::Relaxed);
    let seed = req.seed.unwrap_or(app.seed.wrapping_add(n));
    let cfg = app.cfg.clone();
    let session = blocking(move || Session::new(spec, &cfg, seed).map_err(ApiError::from)).await?;
    let id = format!("{:032x}", rand::random::<u128>());
    let snapshot = session.snapshot();
    log::info!("session {id} started in {:?} mode", snapshot.mode);
    app.sessions
        .lock()
        .expect("session table lock")
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    Ok(Json(SessionCreated {
        v: API_VERSION,
        session_id: id,
        snapshot,
    }))
}

async fn get_session(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Json<Snapshot>, ApiError> {
    let s = app.session(&id)?;
    let snap = s.lock().expect("session lock").snapshot();
    Ok(Json(snap))
}

async fn make_move(
    State(app): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<MoveQuery>,
    Json(req): Json<MoveRequest>,
) -> Result<Json<MoveResponse>, ApiError> {
    let s = app.session(&id)?;
    blocking(move || {
        let mut session = s.lock().expect("session lock");
        let out = session.try_move(&req.outputs, q.dry)?;
        Ok(Json(MoveResponse {
            v: API_VERSION,
            accepted: out.accepted,
            snapshot: session.snapshot(),
            core: core_statements(&out.core),
            notes: out.notes,
        }))
    })
    .await
}

/// Bundled map or fixture name, or the id of a live session.
async fn get_map(State(app): State<Arc<AppState>>, Path(name): Path<String>) -> Result<Json<MapView>, ApiError> {
    if let Some(text) = fixtures::map(&name) {
        let w = Workspace::parse_map(text).map_err(|e| ApiError::internal(e.to_string()))?;
        return Ok(Json(w.view()));
    }
    let spec = if let Some(text) = fixtures::spec(&name) {
        Arc::new(parse_spec(text).map_err(|e| ApiError::internal(e.to_string()))?)
    } else {
        let s = app.session(&name)?;
        let guard = s.lock().expect("session lock");
        Arc::new(guard.spec().clone())
    };
    spec.workspace
        .as_ref()
        .map(|w| Json(w.view()))
        .ok_or_else(|| ApiError::not_found(format!("{name} has no map")))
}

pub fn router(state: Arc<AppState>, assets: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session))
        .route("/api/session/{id}/move", post(make_move))
        .route("/api/map/{name}", get(get_map))
        .with_state(state);
    match assets {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}
