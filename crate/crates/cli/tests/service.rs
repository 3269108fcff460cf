mod common;

use axum::http::StatusCode;
use common::{call, wait_finished};
use echo_pathways::session::{opinion_histogram, SnapshotView, HISTOGRAM_BINS};
use echo_pathways::{RunOptions, ScenarioConfig, Simulation};
use echo_pathways_cli::service::{router, AppState};
use futures_util::StreamExt;
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

fn config(n: usize) -> Value {
    json!({"n": n, "k_o": 10, "epsilon": 0.45, "alpha": 0.05, "q": 0.05, "p": 0.1,
           "strategy": "opinion", "k_h": 2, "max_steps": 2000})
}

async fn create(app: &axum::Router, body: Value) -> String {
    let (status, res) = call(app, "POST", "/session", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{res}");
    assert_eq!(res["v"], 1);
    assert_eq!(res["mode"], "paused");
    assert_eq!(res["step"], 0);
    res["id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn control_and_intervention_lifecycle() {
    let app = router(AppState::new(None));
    let id = create(&app, json!({"config": config(120), "seed": 4})).await;

    let (status, ack) = call(&app, "POST", &format!("/session/{id}/control"), Some(json!({"action": "step", "n": 5}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ack, json!({"v": 1, "step": 5, "mode": "paused"}));

    let body = json!({"kind": "set_param", "param": "alpha", "value": 0.02, "idempotency_key": "k1"});
    let (status, ack) = call(&app, "POST", &format!("/session/{id}/intervene"), Some(body.clone())).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(ack, json!({"v": 1, "queued": true, "effective_step": 5}));
    let (status, ack) = call(&app, "POST", &format!("/session/{id}/intervene"), Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ack["queued"], false);

    let (_, snap) = call(&app, "GET", &format!("/session/{id}/snapshot"), None).await;
    assert_eq!(snap["config"]["alpha"], 0.05);
    call(&app, "POST", &format!("/session/{id}/control"), Some(json!({"action": "step", "n": 1}))).await;
    let (_, snap) = call(&app, "GET", &format!("/session/{id}/snapshot"), None).await;
    assert_eq!(snap["config"]["alpha"], 0.02);
    assert_eq!(snap["interventions"].as_array().unwrap().len(), 1);
    assert_eq!(snap["interventions"][0]["step"], 5);

    let (status, err) = call(
        &app,
        "POST",
        &format!("/session/{id}/intervene"),
        Some(json!({"kind": "set_param", "param": "q", "value": 1.5})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(err["error"].as_str().unwrap().contains('q'));

    let (status, ack) = call(&app, "POST", &format!("/session/{id}/control"), Some(json!({"action": "resume"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_ne!(ack["mode"], "paused");
    let snap = wait_finished(&app, &id).await;
    assert!(snap["step"].as_u64().unwrap() > 6);

    let (status, _) = call(&app, "POST", &format!("/session/{id}/control"), Some(json!({"action": "step", "n": 1}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(
        &app,
        "POST",
        &format!("/session/{id}/intervene"),
        Some(json!({"kind": "set_strategy", "strategy": "random"})),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn bad_requests() {
    let app = router(AppState::new(None));
    let (status, err) = call(&app, "POST", "/session", Some(json!({"config": {"alpha": 0.1}}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(err["error"].as_str().unwrap().contains("epsilon"), "{err}");
    assert_eq!(err["v"], 1);

    let mut c = config(50);
    c["k_o"] = json!(100);
    let (status, _) = call(&app, "POST", "/session", Some(json!({"config": c}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/session", Some(json!({"config": config(50), "tick_rate": 0}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, _) = call(&app, "GET", "/session/nope/snapshot", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/session/nope/control", Some(json!({"action": "pause"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let id = create(&app, json!({"config": config(50)})).await;
    let (status, _) = call(&app, "POST", &format!("/session/{id}/control"), Some(json!({"action": "jump"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn snapshot_matches_offline_stepping() {
    let app = router(AppState::new(None));
    let id = create(&app, json!({"config": config(500), "seed": 9})).await;
    call(&app, "POST", &format!("/session/{id}/control"), Some(json!({"action": "step", "n": 25}))).await;

    let req = axum::http::Request::get(format!("/session/{id}/snapshot")).body(axum::body::Body::empty()).unwrap();
    let res = tower::ServiceExt::oneshot(app.clone(), req).await.unwrap();
    let bytes = axum::body::to_bytes(res.into_body(), 64 << 20).await.unwrap();
    assert!(bytes.len() < 1 << 20, "snapshot is {} bytes", bytes.len());
    let snap: SnapshotView = serde_json::from_slice(&bytes).unwrap();

    let mut cfg: ScenarioConfig = serde_json::from_value(config(500)).unwrap();
    cfg.seed = 9;
    let mut sim = Simulation::new(cfg, RunOptions::default()).unwrap();
    let mut last = None;
    for _ in 0..25 {
        last = Some(sim.advance().unwrap().indices);
    }
    let last = last.unwrap();
    assert_eq!(snap.step, 25);
    assert_eq!(snap.opinions, sim.opinions());
    assert_eq!(snap.edges, sim.graph().edges().collect::<Vec<_>>());
    assert_eq!((snap.indices.rho, snap.indices.i_h, snap.indices.i_p, snap.indices.i_s), (last.rho, last.i_h, last.i_p, last.i_s));
    assert_eq!(snap.indices.histogram, opinion_histogram(sim.opinions(), HISTOGRAM_BINS));
    assert_eq!(snap.indices.histogram.iter().sum::<u32>(), 500);
}

async fn read_until_step(
    ws: &mut tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>,
    step: u64,
) -> Vec<Value> {
    let mut seen = Vec::new();
    while let Some(msg) = ws.next().await {
        let Message::Text(text) = msg.unwrap() else { continue };
        let v: Value = serde_json::from_str(&text).unwrap();
        let done = v["type"] == "mode" && v["step"] == step;
        seen.push(v);
        if done {
            break;
        }
    }
    seen
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn subscribers_see_the_same_stream() {
    let state = AppState::new(None);
    let app = router(state.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(state)).await.unwrap() });

    let id = create(&app, json!({"config": config(150), "seed": 2})).await;
    let url = format!("ws://{addr}/session/{id}/stream");
    let (mut a, _) = tokio_tungstenite::connect_async(&url).await.unwrap();
    let (mut b, _) = tokio_tungstenite::connect_async(&url).await.unwrap();

    // Both start from the current state.
    for ws in [&mut a, &mut b] {
        let Message::Text(text) = ws.next().await.unwrap().unwrap() else { panic!("expected text") };
        let hello: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(hello["type"], "indices");
        assert_eq!(hello["step"], 0);
        assert_eq!(hello["v"], 1);
    }

    call(&app, "POST", &format!("/session/{id}/intervene"), Some(json!({"kind": "set_param", "param": "p", "value": 0.3}))).await;
    call(&app, "POST", &format!("/session/{id}/control"), Some(json!({"action": "step", "n": 12}))).await;
    let seq_a = read_until_step(&mut a, 12).await;
    let seq_b = read_until_step(&mut b, 12).await;
    assert_eq!(seq_a, seq_b);
    assert_eq!(seq_a[0]["type"], "intervention");
    assert_eq!(seq_a[0]["event"]["param"], "p");
    let steps: Vec<u64> = seq_a.iter().filter(|m| m["type"] == "indices").map(|m| m["step"].as_u64().unwrap()).collect();
    assert_eq!(steps, (1..=12).collect::<Vec<_>>());
    for m in seq_a.iter().filter(|m| m["type"] == "indices") {
        assert_eq!(m["histogram"].as_array().unwrap().len(), 50);
    }

    a.close(None).await.unwrap();
    call(&app, "POST", &format!("/session/{id}/control"), Some(json!({"action": "step", "n": 3}))).await;
    let seq_b = read_until_step(&mut b, 15).await;
    assert_eq!(seq_b.iter().filter(|m| m["type"] == "indices").count(), 3);
}
