//! HTTP API for human play sessions, saved trajectories and exploration runs.
//!
//! Every JSON response carries `schema_version`. Errors are
//! `{schema_version, error, message}` with a matching status code.

mod error;
mod runs;
mod sessions;

use std::path::{Component, Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use playtest_core::clone::TrajectoryFile;
use playtest_core::gridworld::{catalog, render_grid, EnvTemplate};
use playtest_core::harness::{prepare_explore, ExploreParams};
use playtest_core::state_space::ground_truth_cells;
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tower_http::services::ServeDir;

pub use error::ApiError;
pub use runs::{RunSnapshot, RunStatus, PUBLISH_EVERY};
pub use sessions::{Session, SessionStatus, SessionStore};

pub const SCHEMA_VERSION: u32 = 1;

/// Seeds drawn for sessions stay below 2^53 so JSON clients keep them exact.
pub const MAX_DRAWN_SEED: u64 = 1 << 53;

/// Largest budget accepted for runs started through the API.
pub const MAX_RUN_BUDGET: u64 = 5_000_000;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Where saved trajectories live; run requests resolve file names here too.
    pub trajectory_dir: PathBuf,
    /// Built UI assets; `None` serves the API only.
    pub static_dir: Option<PathBuf>,
    pub session_ttl: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            trajectory_dir: PathBuf::from("trajectories"),
            static_dir: None,
            session_ttl: Duration::from_secs(24 * 3600),
        }
    }
}

struct Inner {
    config: ServiceConfig,
    sessions: SessionStore,
    runs: runs::RunStore,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState(Arc::new(Inner {
            sessions: SessionStore::new(config.session_ttl),
            runs: runs::RunStore::default(),
            config,
        }))
    }
}

pub fn router(config: ServiceConfig) -> Router {
    let static_dir = config.static_dir.clone();
    let api = Router::new()
        .route("/health", get(health))
        .route("/templates", get(templates))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/actions", post(submit_action))
        .route("/sessions/{id}/save", post(save_session))
        .route("/trajectories", get(list_trajectories))
        .route("/trajectories/{name}", get(get_trajectory).delete(delete_trajectory))
        .route("/runs", post(start_run))
        .route("/runs/{id}", get(run_status))
        .with_state(AppState::new(config));
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    std::fs::create_dir_all(&config.trajectory_dir)?;
    axum::serve(listener, router(config)).await
}

type ApiResult = Result<Json<Value>, ApiError>;

fn reply(mut v: Value) -> ApiResult {
    v["schema_version"] = json!(SCHEMA_VERSION);
    Ok(Json(v))
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::BadRequest(format!("request body: {e}")))
}

async fn not_found() -> Response {
    let body = json!({"schema_version": SCHEMA_VERSION, "error": "not_found", "message": "no such route"});
    (StatusCode::NOT_FOUND, Json(body)).into_response()
}

async fn health(State(s): State<AppState>) -> ApiResult {
    reply(json!({
        "status": "ok",
        "sessions": s.0.sessions.len(),
        "runs": s.0.runs.len(),
    }))
}

fn known_templates() -> Vec<EnvTemplate> {
    catalog::catalog().into_iter().chain(catalog::miniatures()).collect()
}

async fn templates() -> ApiResult {
    reply(json!({ "templates": known_templates() }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    template: String,
    #[serde(default)]
    seed: Option<u64>,
}

fn session_view(s: &Session) -> Value {
    json!({
        "id": s.id,
        "template": s.instance.template,
        "seed": s.instance.seed,
        "status": s.status,
        "created_at": s.created_unix(),
        "steps": s.trajectory.len(),
        "actions": s.trajectory.actions().iter().map(|a| a.id()).collect::<Vec<_>>(),
        "visited": s.visited.len(),
        "ground_truth": s.ground_truth,
        "render": render_grid(&s.state),
    })
}

async fn create_session(State(s): State<AppState>, body: Bytes) -> ApiResult {
    let req: CreateSession = parse(&body)?;
    let template = catalog::by_name(&req.template).ok_or_else(|| ApiError::UnknownTemplate(req.template.clone()))?;
    let seed = req.seed.unwrap_or_else(|| rand::thread_rng().gen_range(0..MAX_DRAWN_SEED));
    let instance = template.instantiate(seed).map_err(|e| ApiError::Internal(e.to_string()))?;
    let gt = ground_truth_cells(&instance).count;
    let entry = s.0.sessions.insert(Session::new(instance, gt));
    let view = session_view(&entry.lock().unwrap());
    reply(view)
}

async fn get_session(State(s): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let entry = s.0.sessions.get(&id)?;
    let view = session_view(&entry.lock().unwrap());
    reply(view)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitAction {
    action: i64,
}

async fn submit_action(State(s): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult {
    let req: SubmitAction = parse(&body)?;
    let entry = s.0.sessions.get(&id)?;
    let mut session = entry.lock().unwrap();
    let outcome = session.act(req.action)?;
    reply(json!({
        "id": session.id,
        "outcome": outcome,
        "steps": session.trajectory.len(),
        "visited": session.visited.len(),
        "ground_truth": session.ground_truth,
        "done": session.state.done,
        "render": render_grid(&session.state),
    }))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SaveSession {
    name: String,
}

/// Trajectory names become file names: letters, digits, `-` and `_` only.
fn valid_name(name: &str) -> Result<&str, ApiError> {
    let name = name.strip_suffix(".json").unwrap_or(name);
    let ok = !name.is_empty()
        && name.len() <= 64
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    ok.then_some(name)
        .ok_or_else(|| ApiError::BadRequest(format!("invalid trajectory name `{name}`")))
}

async fn save_session(State(s): State<AppState>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult {
    let req: SaveSession = parse(&body)?;
    let name = valid_name(&req.name)?.to_string();
    let entry = s.0.sessions.get(&id)?;
    let mut session = entry.lock().unwrap();
    let traj = session.take_for_save()?;
    let path = s.0.config.trajectory_dir.join(format!("{name}.json"));
    if path.exists() {
        return Err(ApiError::BadRequest(format!("trajectory `{name}` already exists")));
    }
    traj.save(&path).map_err(|e| ApiError::Internal(e.to_string()))?;
    session.mark_saved();
    reply(json!({
        "id": session.id,
        "name": name,
        "file": format!("{name}.json"),
        "steps": traj.len(),
        "status": session.status,
    }))
}

async fn list_trajectories(State(s): State<AppState>) -> ApiResult {
    let mut items = Vec::new();
    if let Ok(entries) = std::fs::read_dir(&s.0.config.trajectory_dir) {
        for e in entries.flatten() {
            let p = e.path();
            if p.extension().is_none_or(|x| x != "json") {
                continue;
            }
            let Some(file) = std::fs::read_to_string(&p)
                .ok()
                .and_then(|t| serde_json::from_str::<TrajectoryFile>(&t).ok())
            else {
                continue;
            };
            items.push(json!({
                "name": p.file_stem().unwrap().to_string_lossy(),
                "template": file.template,
                "seed": file.seed,
                "steps": file.actions.len(),
                "author": file.author,
                "recorded_at": file.recorded_at,
            }));
        }
    }
    items.sort_by(|a, b| a["name"].as_str().cmp(&b["name"].as_str()));
    reply(json!({ "trajectories": items }))
}

fn trajectory_path(s: &AppState, name: &str) -> Result<PathBuf, ApiError> {
    let name = valid_name(name).map_err(|_| ApiError::BadRequest(format!("invalid trajectory name `{name}`")))?;
    let p = s.0.config.trajectory_dir.join(format!("{name}.json"));
    if !p.is_file() {
        return Err(ApiError::BadRequest(format!("no trajectory named `{name}`")));
    }
    Ok(p)
}

/// Raw stored file, byte for byte.
async fn get_trajectory(State(s): State<AppState>, UrlPath(name): UrlPath<String>) -> Result<Response, ApiError> {
    let p = trajectory_path(&s, &name)?;
    let bytes = std::fs::read(p).map_err(|e| ApiError::Internal(e.to_string()))?;
    Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response())
}

async fn delete_trajectory(State(s): State<AppState>, UrlPath(name): UrlPath<String>) -> ApiResult {
    let p = trajectory_path(&s, &name)?;
    std::fs::remove_file(p).map_err(|e| ApiError::Internal(e.to_string()))?;
    reply(json!({ "deleted": valid_name(&name)? }))
}

/// Run requests may only name files inside the trajectory directory.
fn confined(p: &Option<PathBuf>) -> Result<(), ApiError> {
    match p {
        Some(p) if p.is_absolute() || p.components().any(|c| !matches!(c, Component::Normal(_))) => {
            Err(ApiError::BadRequest(format!("{} must be a plain relative path", p.display())))
        }
        _ => Ok(()),
    }
}

async fn start_run(State(s): State<AppState>, body: Bytes) -> ApiResult {
    let params: ExploreParams = parse(&body)?;
    confined(&params.trajectory)?;
    confined(&params.model)?;
    if params.budget > MAX_RUN_BUDGET {
        return Err(ApiError::BadRequest(format!("budget above {MAX_RUN_BUDGET}")));
    }
    let base: &Path = &s.0.config.trajectory_dir;
    let setup = prepare_explore(&params, base).map_err(|e| match e {
        playtest_core::harness::HarnessError::Invalid(m) if m.starts_with("unknown template") => {
            ApiError::UnknownTemplate(params.template.clone())
        }
        e => ApiError::BadRequest(e.to_string()),
    })?;
    let gt = ground_truth_cells(&setup.instance).count;
    let instance_seed = setup.instance.seed;
    let run = s.0.runs.start(params, setup, gt)?;
    reply(json!({
        "id": run.id,
        "instance_seed": instance_seed,
        "ground_truth": gt,
        "budget": run.params.budget,
    }))
}

async fn run_status(State(s): State<AppState>, UrlPath(id): UrlPath<String>) -> ApiResult {
    let run = s.0.runs.get(&id)?;
    let snap = run.snapshot();
    let saturation = snap.curve.iter().position(|&c| c >= run.ground_truth);
    reply(json!({
        "id": run.id,
        "status": snap.status,
        "iteration": snap.curve.len().saturating_sub(1),
        "budget": run.params.budget,
        "ground_truth": run.ground_truth,
        "saturation": saturation,
        "curve": snap.curve,
        "tree_offset": snap.tree_offset,
        "error": snap.error,
    }))
}
