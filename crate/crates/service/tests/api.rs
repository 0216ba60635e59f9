use std::path::Path;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use playtest_core::clone::{replay_verify, train, TrainConfig, Trajectory};
use playtest_core::explorer::{run, ActionSampler, ActionWeights, ExplorerConfig};
use playtest_core::gridworld::{catalog, replay, Action};
use playtest_core::state_space::CoverageCurve;
use playtest_service::{router, ServiceConfig, MAX_DRAWN_SEED, SCHEMA_VERSION};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(dir: &Path) -> Router {
    router(ServiceConfig {
        trajectory_dir: dir.to_path_buf(),
        static_dir: None,
        session_ttl: Duration::from_secs(3600),
    })
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let v: Value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, v)
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

#[tokio::test]
async fn health_and_templates() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (st, v) = get(&app, "/health").await;
    assert_eq!(st, StatusCode::OK);
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    let (_, v) = get(&app, "/templates").await;
    let names: Vec<&str> = v["templates"].as_array().unwrap().iter().map(|t| t["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"DualHallway") && names.contains(&"CascadingLockDoor"));
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
}

#[tokio::test]
async fn explicit_seed_gives_identical_renders() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (st, a) = post(&app, "/sessions", json!({"template": "DualHallway", "seed": 5})).await;
    assert_eq!(st, StatusCode::OK);
    let (_, b) = post(&app, "/sessions", json!({"template": "DualHallway", "seed": 5})).await;
    assert_eq!(a["render"], b["render"]);
    assert_ne!(a["id"], b["id"]);
    assert_eq!(a["visited"], 1);
    assert_eq!(a["ground_truth"], 96);
}

#[tokio::test]
async fn drawn_seed_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (_, v) = post(&app, "/sessions", json!({"template": "CascadingLockDoor"})).await;
    let seed = v["seed"].as_u64().unwrap();
    assert!(seed < MAX_DRAWN_SEED);
    let expect = catalog::cascading_lock_door().instantiate(seed).unwrap();
    let render = serde_json::to_value(playtest_core::gridworld::render_grid(&expect.initial)).unwrap();
    assert_eq!(v["render"], render);
}

#[tokio::test]
async fn unknown_template_and_session() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (st, v) = post(&app, "/sessions", json!({"template": "Nope"})).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown_template");
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    let (st, v) = get(&app, "/sessions/00000000-0000-0000-0000-000000000000").await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown_session");
    let (st, v) = post(&app, "/sessions", json!({"templat": "DualHallway"})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
}

#[tokio::test]
async fn actions_step_and_count_cells() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (_, s) = post(&app, "/sessions", json!({"template": "DualHallway", "seed": 0})).await;
    let id = s["id"].as_str().unwrap().to_string();
    let inst = catalog::dual_hallway().instantiate(0).unwrap();
    // Walk forward until a wall blocks the way.
    let mut state = inst.initial.clone();
    let mut actions = Vec::new();
    while state.front_cell().is_some_and(|c| state.tile(c).occupiable()) {
        state = playtest_core::gridworld::step(&state, Action::Forward).unwrap().0;
        actions.push(Action::Forward);
    }
    let mut visited = 1;
    for (i, a) in actions.iter().enumerate() {
        let (st, v) = post(&app, &format!("/sessions/{id}/actions"), json!({"action": a.id()})).await;
        assert_eq!(st, StatusCode::OK);
        assert_eq!(v["outcome"], "moved");
        assert_eq!(v["visited"], visited + 1, "step {i}");
        visited += 1;
    }
    let (_, before) = get(&app, &format!("/sessions/{id}")).await;
    let (_, v) = post(&app, &format!("/sessions/{id}/actions"), json!({"action": 2})).await;
    assert_eq!(v["outcome"], "blocked");
    assert_eq!(v["visited"], visited);
    let mut expected = before["render"].clone();
    expected["step_count"] = json!(before["render"]["step_count"].as_u64().unwrap() + 1);
    assert_eq!(v["render"], expected);

    let (st, v) = post(&app, &format!("/sessions/{id}/actions"), json!({"action": 9})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    assert_eq!(v["error"], "invalid_action");
    let (_, after) = get(&app, &format!("/sessions/{id}")).await;
    assert_eq!(after["steps"], actions.len() + 1);

    // Replay integrity: recorded actions reproduce the current state.
    let ids: Vec<Action> = after["actions"].as_array().unwrap().iter().map(|a| Action::from_id(a.as_u64().unwrap() as u8).unwrap()).collect();
    let last = replay(&inst.initial, &ids).unwrap().pop().unwrap();
    assert_eq!(serde_json::to_value(playtest_core::gridworld::render_grid(&last)).unwrap(), after["render"]);
}

#[tokio::test]
async fn save_lists_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (_, s) = post(&app, "/sessions", json!({"template": "DualHallway", "seed": 3})).await;
    let id = s["id"].as_str().unwrap().to_string();
    let (st, v) = post(&app, &format!("/sessions/{id}/save"), json!({"name": "empty"})).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "empty_session");
    for a in [2, 2, 1, 2, 2, 0, 2] {
        post(&app, &format!("/sessions/{id}/actions"), json!({"action": a})).await;
    }
    let (st, v) = post(&app, &format!("/sessions/{id}/save"), json!({"name": "../evil"})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST, "{v}");
    let (st, v) = post(&app, &format!("/sessions/{id}/save"), json!({"name": "first"})).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    assert_eq!(v["status"], "saved");
    // Saved sessions accept no further actions.
    let (st, v) = post(&app, &format!("/sessions/{id}/actions"), json!({"action": 2})).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(v["error"], "session_not_live");

    let t = Trajectory::load(dir.path().join("first.json")).unwrap();
    assert!(replay_verify(&t).unwrap());
    assert_eq!(t.len(), 7);
    assert!(t.recorded_at.is_some());
    // The file trains a clone as is.
    train(&[t], &TrainConfig { epochs: 2, ..Default::default() }).unwrap();

    let (_, v) = get(&app, "/trajectories").await;
    assert_eq!(v["trajectories"][0]["name"], "first");
    assert_eq!(v["trajectories"][0]["steps"], 7);
    let resp = app
        .clone()
        .oneshot(Request::get("/trajectories/first").body(Body::empty()).unwrap())
        .await
        .unwrap();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    assert_eq!(&bytes[..], &std::fs::read(dir.path().join("first.json")).unwrap()[..]);
    let (st, _) = call(&app, Method::DELETE, "/trajectories/first", None).await;
    assert_eq!(st, StatusCode::OK);
    let (_, v) = get(&app, "/trajectories").await;
    assert!(v["trajectories"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn concurrent_sessions_stay_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let mut ids = Vec::new();
    for seed in 0..4 {
        let (_, s) = post(&app, "/sessions", json!({"template": "MiniDualHallway", "seed": seed})).await;
        ids.push(s["id"].as_str().unwrap().to_string());
    }
    let mut tasks = Vec::new();
    for (k, id) in ids.iter().enumerate() {
        for i in 0..30 {
            let app = app.clone();
            let uri = format!("/sessions/{id}/actions");
            tasks.push(tokio::spawn(async move { post(&app, &uri, json!({"action": (i + k) % 3})).await }));
        }
    }
    for t in tasks {
        assert_eq!(t.await.unwrap().0, StatusCode::OK);
    }
    for (seed, id) in ids.iter().enumerate() {
        let (_, v) = get(&app, &format!("/sessions/{id}")).await;
        assert_eq!(v["steps"], 30);
        let inst = catalog::mini_dual_hallway().instantiate(seed as u64).unwrap();
        let acts: Vec<Action> = v["actions"].as_array().unwrap().iter().map(|a| Action::from_id(a.as_u64().unwrap() as u8).unwrap()).collect();
        let last = replay(&inst.initial, &acts).unwrap().pop().unwrap();
        assert_eq!(serde_json::to_value(playtest_core::gridworld::render_grid(&last)).unwrap(), v["render"]);
    }
}

async fn wait_finished(app: &Router, id: &str) -> Value {
    for _ in 0..2000 {
        let (_, v) = get(app, &format!("/runs/{id}")).await;
        if v["status"] != "running" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(5)).await;
    }
    panic!("run did not finish");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn runs_publish_growing_prefixes() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (st, v) = post(&app, "/runs", json!({"template": "DualHallway", "method": "wrrt", "budget": 4000, "seed": 3, "instance_seed": 2})).await;
    assert_eq!(st, StatusCode::OK, "{v}");
    let id = v["id"].as_str().unwrap().to_string();
    let (_, first) = get(&app, &format!("/runs/{id}")).await;
    let done = wait_finished(&app, &id).await;
    let a = first["curve"].as_array().unwrap();
    let b = done["curve"].as_array().unwrap();
    assert_eq!(&b[..a.len()], &a[..]);
    assert_eq!(done["status"], "finished");
    assert_eq!(b.len(), 4001);

    // Same as a direct run and its CSV export.
    let inst = catalog::dual_hallway().instantiate(2).unwrap();
    let cfg = ExplorerConfig { max_iterations: 4000, seed: 3, ..Default::default() };
    let (tree, curve) = run(&inst, ActionSampler::Weighted(ActionWeights::default()), None, cfg).unwrap();
    let served = CoverageCurve(b.iter().map(|x| x.as_u64().unwrap() as u32).collect());
    assert_eq!(served.to_csv(), curve.to_csv());
    assert_eq!(done["tree_offset"], tree.len());
}

#[tokio::test]
async fn run_errors() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (st, v) = get(&app, "/runs/not-a-run").await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["error"], "unknown_run");
    let (st, _) = post(&app, "/runs", json!({"template": "DualHallway", "method": "hsrrt"})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = post(&app, "/runs", json!({"template": "DualHallway", "method": "hsrrt", "trajectory": "/etc/passwd"})).await;
    assert_eq!(st, StatusCode::BAD_REQUEST);
    let (st, _) = post(&app, "/runs", json!({"template": "Nope", "method": "rrt"})).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn static_routes_need_ui() {
    let dir = tempfile::tempdir().unwrap();
    let (st, v) = get(&app(dir.path()), "/index.html").await;
    assert_eq!(st, StatusCode::NOT_FOUND);
    assert_eq!(v["schema_version"], SCHEMA_VERSION);

    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<html>ui</html>").unwrap();
    let with_ui = router(ServiceConfig {
        trajectory_dir: dir.path().to_path_buf(),
        static_dir: Some(ui.path().to_path_buf()),
        ..Default::default()
    });
    let resp = with_ui.oneshot(Request::get("/index.html").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
}

#[tokio::test]
async fn idle_sessions_expire() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(ServiceConfig {
        trajectory_dir: dir.path().to_path_buf(),
        static_dir: None,
        session_ttl: Duration::from_millis(20),
    });
    let (_, s) = post(&app, "/sessions", json!({"template": "DualHallway", "seed": 1})).await;
    let id = s["id"].as_str().unwrap().to_string();
    tokio::time::sleep(Duration::from_millis(60)).await;
    let (st, _) = get(&app, &format!("/sessions/{id}")).await;
    assert_eq!(st, StatusCode::NOT_FOUND);
}
